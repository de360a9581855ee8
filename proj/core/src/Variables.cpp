#include "scitrend/Variables.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "scitrend/Errors.h"
#include "scitrend/Util.h"

namespace scitrend {

namespace {

void requireTask(const Entity& task) {
    if (task.type != EntityType::Task) {
        throw DomainError("expected a task entity, got type " + toString(task.type) + " for \"" +
                          task.canonical + "\"");
    }
}

std::set<Entity> neighborSet(const EmbeddingSpace& space, const Entity& task, std::size_t l) {
    auto neighbors = nearestNeighbors(space, task, l);
    return {neighbors.begin(), neighbors.end()};
}

double jaccard(const std::set<Entity>& a, const std::set<Entity>& b) {
    std::size_t intersection = 0;
    for (const auto& e : a) {
        intersection += b.count(e);
    }
    std::size_t unionSize = a.size() + b.size() - intersection;
    if (unionSize == 0) {
        return 1.0;  // both neighbor sets empty (l = 0)
    }
    return static_cast<double>(intersection) / static_cast<double>(unionSize);
}

// Per-entity change values for one year pair, from the task's co-occurrence
// table. Returns an empty map per type when the type's denominator is zero.
std::map<Entity, double> changeValues(const std::map<int, std::map<Entity, std::size_t>>& table, int t1,
                                      int t2) {
    static const std::map<Entity, std::size_t> kEmpty;
    const auto& first = table.count(t1) ? table.at(t1) : kEmpty;
    const auto& second = table.count(t2) ? table.at(t2) : kEmpty;

    std::set<Entity> candidates;
    std::map<EntityType, double> denominators;
    for (const auto* counts : {&first, &second}) {
        for (const auto& [entity, count] : *counts) {
            candidates.insert(entity);
            denominators[entity.type] += static_cast<double>(count);
        }
    }
    std::map<Entity, double> values;
    for (const auto& entity : candidates) {
        auto c1It = first.find(entity);
        auto c2It = second.find(entity);
        double c1 = c1It == first.end() ? 0.0 : static_cast<double>(c1It->second);
        double c2 = c2It == second.end() ? 0.0 : static_cast<double>(c2It->second);
        values[entity] = std::abs(c1 - c2) / denominators.at(entity.type);
    }
    return values;
}

std::optional<double> aggregate(const std::vector<double>& values, ChangeAggregation aggregation) {
    if (values.empty()) {
        return std::nullopt;
    }
    switch (aggregation) {
        case ChangeAggregation::Max:
            return *std::max_element(values.begin(), values.end());
        case ChangeAggregation::Sum: {
            double sum = 0.0;
            for (double v : values) {
                sum += v;
            }
            return sum;
        }
        case ChangeAggregation::Mean:
        default: {
            double sum = 0.0;
            for (double v : values) {
                sum += v;
            }
            return sum / static_cast<double>(values.size());
        }
    }
}

std::string optionalField(const std::optional<double>& value) {
    return value ? formatDouble(*value) : "";
}

std::optional<double> parseOptionalField(const std::string& field, std::size_t lineNo) {
    if (field.empty()) {
        return std::nullopt;
    }
    try {
        std::size_t pos = 0;
        double value = std::stod(field, &pos);
        if (pos != field.size()) {
            throw std::invalid_argument(field);
        }
        return value;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineNo) + ": not a number: \"" + field + "\"");
    }
}

const char* kSamplesHeader = "task,t1,t2,freq_shift,stability,change_task,change_dataset,change_method,change_metric";

}  // namespace

const std::string& toString(ChangeAggregation aggregation) {
    static const std::string names[] = {"mean", "max", "sum"};
    return names[static_cast<int>(aggregation)];
}

ChangeAggregation aggregationFromString(const std::string& text) {
    for (ChangeAggregation aggregation :
         {ChangeAggregation::Mean, ChangeAggregation::Max, ChangeAggregation::Sum}) {
        if (text == toString(aggregation)) {
            return aggregation;
        }
    }
    throw ConfigError("unknown aggregation \"" + text + "\" (expected mean, max, or sum)");
}

bool VariableSample::complete() const {
    if (!freqShift || !stability) {
        return false;
    }
    for (EntityType type : kEntityTypes) {
        auto it = changeByType.find(type);
        if (it == changeByType.end() || !it->second) {
            return false;
        }
    }
    return true;
}

std::map<Entity, std::size_t> countTaskPapers(const Corpus& corpus, int year,
                                              const std::vector<std::string>& sections) {
    std::map<Entity, std::size_t> counts;
    for (std::size_t row : corpus.paperRowsInYear(year)) {
        for (const auto& task : assignPaperTasks(corpus.papers()[row], sections)) {
            ++counts[task];
        }
    }
    return counts;
}

double taskFrequency(const Corpus& corpus, const Entity& task, int year,
                     const std::vector<std::string>& sections) {
    requireTask(task);
    std::size_t total = corpus.paperCount(year);
    if (total == 0) {
        throw DomainError("undefined frequency: no papers in year " + std::to_string(year));
    }
    auto counts = countTaskPapers(corpus, year, sections);
    auto it = counts.find(task);
    std::size_t taskPapers = it == counts.end() ? 0 : it->second;
    return static_cast<double>(taskPapers) / static_cast<double>(total);
}

TaskSeries taskFrequencySeries(const Corpus& corpus, const Entity& task,
                               const std::vector<std::string>& sections) {
    requireTask(task);
    TaskSeries series;
    series.task = task;
    for (const auto& [year, count] : corpus.yearIndex()) {
        series.frequencyByYear[year] = taskFrequency(corpus, task, year, sections);
    }
    return series;
}

double frequencyShift(const Corpus& corpus, const Entity& task, int t1, int t2,
                      const std::vector<std::string>& sections) {
    if (t1 >= t2) {
        throw DomainError("frequency shift requires t1 < t2");
    }
    double f1 = taskFrequency(corpus, task, t1, sections);
    double f2 = taskFrequency(corpus, task, t2, sections);
    return (f2 - f1) / static_cast<double>(t2 - t1);
}

double taskStability(const EmbeddingSpace& spaceT1, const EmbeddingSpace& spaceT2, const Entity& task,
                     std::size_t l) {
    return jaccard(neighborSet(spaceT1, task, l), neighborSet(spaceT2, task, l));
}

double entityChange(const Corpus& corpus, const Entity& x, const Entity& task, int t1, int t2) {
    requireTask(task);
    if (x == task) {
        throw DomainError("entity change requires x distinct from the task");
    }
    auto table = cooccurrencesWithTask(corpus, task);
    static const std::map<Entity, std::size_t> kEmpty;
    const auto& first = table.count(t1) ? table.at(t1) : kEmpty;
    const auto& second = table.count(t2) ? table.at(t2) : kEmpty;
    double denominator = 0.0;
    for (const auto* counts : {&first, &second}) {
        for (const auto& [entity, count] : *counts) {
            if (entity.type == x.type) {
                denominator += static_cast<double>(count);
            }
        }
    }
    if (denominator == 0.0) {
        throw DomainError("undefined change value: no " + toString(x.type) +
                          " entity co-occurs with \"" + task.canonical + "\" in " + std::to_string(t1) +
                          " or " + std::to_string(t2));
    }
    auto c1It = first.find(x);
    auto c2It = second.find(x);
    double c1 = c1It == first.end() ? 0.0 : static_cast<double>(c1It->second);
    double c2 = c2It == second.end() ? 0.0 : static_cast<double>(c2It->second);
    return std::abs(c1 - c2) / denominator;
}

std::vector<VariableSample> assembleSamples(const Corpus& corpus, const std::vector<Entity>& tasks,
                                            const std::vector<std::pair<int, int>>& yearPairs,
                                            const SpacesByYear& spaces, const AssembleOptions& options) {
    for (const auto& [t1, t2] : yearPairs) {
        if (t1 >= t2) {
            throw DomainError("year pairs must satisfy t1 < t2; got (" + std::to_string(t1) + ", " +
                              std::to_string(t2) + ")");
        }
    }
    std::set<int> years;
    for (const auto& [t1, t2] : yearPairs) {
        years.insert(t1);
        years.insert(t2);
    }
    std::map<int, std::map<Entity, std::size_t>> taskCounts;
    for (int year : years) {
        if (corpus.paperCount(year) > 0) {
            taskCounts[year] = countTaskPapers(corpus, year, options.taskSections);
        }
    }
    auto frequencyAt = [&](const Entity& task, int year) -> std::optional<double> {
        auto it = taskCounts.find(year);
        if (it == taskCounts.end()) {
            return std::nullopt;
        }
        auto taskIt = it->second.find(task);
        std::size_t count = taskIt == it->second.end() ? 0 : taskIt->second;
        return static_cast<double>(count) / static_cast<double>(corpus.paperCount(year));
    };

    std::vector<VariableSample> samples;
    for (const auto& task : tasks) {
        requireTask(task);
        auto table = cooccurrencesWithTask(corpus, task);
        for (const auto& [t1, t2] : yearPairs) {
            VariableSample sample;
            sample.task = task;
            sample.t1 = t1;
            sample.t2 = t2;

            auto f1 = frequencyAt(task, t1);
            auto f2 = frequencyAt(task, t2);
            if (f1 && f2) {
                sample.freqShift = (*f2 - *f1) / static_cast<double>(t2 - t1);
            }

            auto s1 = spaces.find(t1);
            auto s2 = spaces.find(t2);
            if (s1 != spaces.end() && s2 != spaces.end() && s1->second.contains(task) &&
                s2->second.contains(task) && options.neighbors + 1 <= s1->second.size() &&
                options.neighbors + 1 <= s2->second.size()) {
                sample.stability = taskStability(s1->second, s2->second, task, options.neighbors);
            }

            sample.changeByEntity = changeValues(table, t1, t2);
            std::map<EntityType, std::vector<double>> byType;
            for (const auto& [entity, value] : sample.changeByEntity) {
                byType[entity.type].push_back(value);
            }
            for (EntityType type : kEntityTypes) {
                sample.changeByType[type] = aggregate(byType[type], options.aggregation);
            }
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

std::size_t completeCount(const std::vector<VariableSample>& samples) {
    std::size_t count = 0;
    for (const auto& sample : samples) {
        count += sample.complete();
    }
    return count;
}

void writeSamplesCsv(const std::vector<VariableSample>& samples, std::ostream& out) {
    out << kSamplesHeader << '\n';
    for (const auto& sample : samples) {
        out << csvEscape(sample.task.canonical) << ',' << sample.t1 << ',' << sample.t2 << ','
            << optionalField(sample.freqShift) << ',' << optionalField(sample.stability);
        for (EntityType type : kEntityTypes) {
            auto it = sample.changeByType.find(type);
            out << ',' << (it == sample.changeByType.end() ? "" : optionalField(it->second));
        }
        out << '\n';
    }
}

std::vector<VariableSample> readSamplesCsv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty samples file");
    }
    if (trim(line) != kSamplesHeader) {
        throw ParseError("unexpected samples header: " + line);
    }
    std::vector<VariableSample> samples;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = splitCsvLine(line);
        if (fields.size() != 9) {
            throw ParseError("line " + std::to_string(lineNo) + ": expected 9 fields, got " +
                             std::to_string(fields.size()));
        }
        VariableSample sample;
        sample.task = Entity{fields[0], EntityType::Task};
        try {
            sample.t1 = std::stoi(fields[1]);
            sample.t2 = std::stoi(fields[2]);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(lineNo) + ": invalid year fields");
        }
        if (sample.t1 >= sample.t2) {
            throw ParseError("line " + std::to_string(lineNo) + ": t1 must be smaller than t2");
        }
        sample.freqShift = parseOptionalField(fields[3], lineNo);
        sample.stability = parseOptionalField(fields[4], lineNo);
        for (std::size_t i = 0; i < kEntityTypes.size(); ++i) {
            sample.changeByType[kEntityTypes[i]] = parseOptionalField(fields[5 + i], lineNo);
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace scitrend
