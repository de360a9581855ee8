#pragma once

// Deliberately naive reference implementations, written straight from the
// formula definitions with plain loops. They share no code with the library
// so agreement between the two is meaningful evidence.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scitrend/Corpus.h"
#include "scitrend/Embeddings.h"

namespace oracle {

std::size_t cooccurrence(const std::vector<scitrend::PaperRecord>& papers, const scitrend::Entity& a,
                         const scitrend::Entity& b, int year);

std::vector<scitrend::Entity> paperTasks(const scitrend::PaperRecord& paper,
                                         const std::vector<std::string>& sections);

double taskFrequency(const std::vector<scitrend::PaperRecord>& papers, const scitrend::Entity& task, int year,
                     const std::vector<std::string>& sections);

double frequencyShift(const std::vector<scitrend::PaperRecord>& papers, const scitrend::Entity& task, int t1,
                      int t2, const std::vector<std::string>& sections);

// |C_t1 - C_t2| over the summed same-type co-occurrence mass in both years.
// Returns -1 when the denominator is zero (caller checks).
double entityChange(const std::vector<scitrend::PaperRecord>& papers, const scitrend::Entity& x,
                    const scitrend::Entity& task, int t1, int t2);

std::vector<scitrend::Entity> nearestNeighbors(const scitrend::EmbeddingSpace& space,
                                               const scitrend::Entity& e, std::size_t l);

double stability(const scitrend::EmbeddingSpace& s1, const scitrend::EmbeddingSpace& s2,
                 const scitrend::Entity& task, std::size_t l);

double npmi(std::size_t joint, std::size_t x, std::size_t y, std::size_t total);

double pearson(const std::vector<double>& u, const std::vector<double>& v);

// Normal-equations least squares in long double; returns {intercept, b1...}.
std::vector<double> olsNormalEquations(const std::vector<std::vector<double>>& columns,
                                       const std::vector<double>& target);

}  // namespace oracle
