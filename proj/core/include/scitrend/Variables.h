#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scitrend/Corpus.h"
#include "scitrend/Embeddings.h"

namespace scitrend {

// Normalized per-year frequency of one task. Years without papers are
// absent, never zero-filled.
struct TaskSeries {
    Entity task;
    std::map<int, double> frequencyByYear;
};

enum class ChangeAggregation { Mean, Max, Sum };

const std::string& toString(ChangeAggregation aggregation);
ChangeAggregation aggregationFromString(const std::string& text);

// One observation row: a task compared between years t1 < t2. Fields that
// cannot be computed (no papers, task missing from an embedding space, no
// co-occurring entity of a type) stay empty instead of failing the row.
struct VariableSample {
    Entity task;
    int t1 = 0;
    int t2 = 0;
    std::optional<double> freqShift;
    std::optional<double> stability;
    std::map<EntityType, std::optional<double>> changeByType;
    std::map<Entity, double> changeByEntity;

    bool complete() const;
};

using SpacesByYear = std::map<int, EmbeddingSpace>;

// Papers assigned to each task in `year` (by most-frequent-mention
// assignment over the given sections).
std::map<Entity, std::size_t> countTaskPapers(const Corpus& corpus, int year,
                                              const std::vector<std::string>& sections = defaultTaskSections());

// Fraction of the year's papers assigned to `task`.
double taskFrequency(const Corpus& corpus, const Entity& task, int year,
                     const std::vector<std::string>& sections = defaultTaskSections());

TaskSeries taskFrequencySeries(const Corpus& corpus, const Entity& task,
                               const std::vector<std::string>& sections = defaultTaskSections());

// (f(t2) - f(t1)) / (t2 - t1); negative for declining tasks.
double frequencyShift(const Corpus& corpus, const Entity& task, int t1, int t2,
                      const std::vector<std::string>& sections = defaultTaskSections());

// Jaccard overlap of the task's l nearest neighbors in the two spaces.
double taskStability(const EmbeddingSpace& spaceT1, const EmbeddingSpace& spaceT2, const Entity& task,
                     std::size_t l = 5);

// |C_t1(x,task) - C_t2(x,task)| normalized by the total co-occurrence mass
// of x's type with the task over both years.
double entityChange(const Corpus& corpus, const Entity& x, const Entity& task, int t1, int t2);

struct AssembleOptions {
    ChangeAggregation aggregation = ChangeAggregation::Mean;
    std::size_t neighbors = 5;
    std::vector<std::string> taskSections = defaultTaskSections();
};

// Builds the observational dataset: one sample per (task, year pair).
std::vector<VariableSample> assembleSamples(const Corpus& corpus, const std::vector<Entity>& tasks,
                                            const std::vector<std::pair<int, int>>& yearPairs,
                                            const SpacesByYear& spaces, const AssembleOptions& options = {});

std::size_t completeCount(const std::vector<VariableSample>& samples);

// CSV with columns task,t1,t2,freq_shift,stability,change_task,
// change_dataset,change_method,change_metric; absent values are empty
// fields. Per-entity change values are not part of this matrix.
void writeSamplesCsv(const std::vector<VariableSample>& samples, std::ostream& out);
std::vector<VariableSample> readSamplesCsv(std::istream& in);

}  // namespace scitrend
