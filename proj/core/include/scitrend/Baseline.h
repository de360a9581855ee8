#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "scitrend/Corpus.h"

namespace scitrend {

// Sentence-level occurrence counts for a pair of entities over a slice.
struct CooccurrenceStats {
    std::size_t x = 0;      // sentences containing x
    std::size_t y = 0;      // sentences containing y
    std::size_t joint = 0;  // sentences containing both
    std::size_t total = 0;  // all sentences in the slice
};

// Counts sentences mentioning x, y, and both across the slice (whole corpus
// when no period is given).
CooccurrenceStats collectCooccurrenceStats(const Corpus& corpus, const Entity& x, const Entity& y,
                                           const std::optional<Period>& slice = std::nullopt);

// Normalized pointwise mutual information,
//   ln(p(x,y) / (p(x) p(y))) / (-ln p(x,y)),
// with the analytic limits -1 for never-joint and +1 for only-joint pairs.
double npmi(const CooccurrenceStats& stats);

double pearson(const std::vector<double>& u, const std::vector<double>& v);

struct BaselineRankEntry {
    Entity entity;
    double score = 0.0;       // npmi against the task
    std::size_t joint = 0;    // joint sentence count (tie-break)
};

// Per-type NPMI rankings of entities against a task, strongest association
// first. Ties break by higher joint count, then lexicographically. Only
// entities actually co-occurring with the task appear.
std::map<EntityType, std::vector<BaselineRankEntry>> npmiRankings(const Corpus& corpus, const Entity& task,
                                                                  const std::optional<Period>& slice = std::nullopt,
                                                                  std::size_t topK = 5);

}  // namespace scitrend
