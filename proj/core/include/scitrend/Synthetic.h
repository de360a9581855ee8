#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scitrend/Corpus.h"

namespace scitrend {

enum class NoiseFamily { Uniform, Laplace };

const std::string& toString(NoiseFamily family);

struct SemEdge {
    std::size_t cause = 0;
    std::size_t effect = 0;
    double coefficient = 0.0;
};

// Linear acyclic structural equation model with non-Gaussian noise.
struct SemSpec {
    std::size_t variables = 0;
    std::vector<SemEdge> edges;
    NoiseFamily noise = NoiseFamily::Uniform;
    std::vector<double> noiseScale;  // per-variable, defaults to 1.0
};

struct SemSample {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::size_t> generatingOrder;          // topological
    std::vector<std::vector<double>> strengths;        // [effect][cause]
};

// Draws n joint samples. Unit-variance noise unless scaled. Throws on
// cyclic edge sets.
SemSample generateSem(const SemSpec& spec, std::size_t n, std::uint64_t seed);

struct SyntheticCorpusSpec {
    int startYear = 2000;
    int years = 20;
    std::size_t papersPerYear = 10;
    std::size_t otherTasks = 7;
    bool adversary = true;  // plant the high-NPMI, zero-effect entity
};

struct SyntheticGroundTruth {
    Entity targetTask;
    Entity driver;                  // method whose change drives the task
    std::optional<Entity> adversary;  // co-occurs exclusively but constantly
    double boundaryDelta = 0.0;     // driver change value between first/last year
    int firstYear = 0;
    int lastYear = 0;
    std::vector<std::size_t> taskPapersPerYear;
    std::vector<std::size_t> driverCooccurrences;
};

struct SyntheticCorpus {
    Corpus corpus;
    SyntheticGroundTruth truth;
};

// Builds a tagged corpus where the target task's paper share rises
// monotonically and the driver's sentence co-occurrence tracks it, so the
// driver's change value has a real dose-response effect on the frequency
// shift. Background entities carry small jittered co-occurrence; the
// adversary appears only in task sentences with a constant yearly count.
// The first-to-last-year driver change value is exactly 0.4 by counting.
SyntheticCorpus generateSyntheticCorpus(const SyntheticCorpusSpec& spec, std::uint64_t seed);

void writeGroundTruthJson(const SyntheticCorpus& synthetic, const SemSpec* semSpec,
                          const SemSample* semSample, std::ostream& out);

void writeMatrixCsv(const std::vector<std::string>& names,
                    const std::vector<std::vector<double>>& columns, std::ostream& out);

}  // namespace scitrend
