#include "scitrend/Synthetic.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "scitrend/Errors.h"
#include "scitrend/Random.h"
#include "scitrend/Util.h"

namespace scitrend {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kBackgroundMethods = 3;
constexpr std::size_t kDatasets = 2;
constexpr std::size_t kMetrics = 2;
constexpr std::size_t kMethodBase = 2;    // background method co-occurrences per year
constexpr std::size_t kDatasetBase = 3;
constexpr std::size_t kMetricBase = 3;
constexpr std::size_t kTaskBase = 2;      // task-task co-occurrences per year
constexpr std::size_t kAdversaryCount = 4;
constexpr std::size_t kDriverLow = 2;
constexpr std::size_t kDriverHigh = 18;

std::vector<std::size_t> topologicalOrder(const SemSpec& spec) {
    std::vector<std::size_t> indegree(spec.variables, 0);
    std::vector<std::vector<std::size_t>> children(spec.variables);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& edge : spec.edges) {
        if (edge.cause >= spec.variables || edge.effect >= spec.variables) {
            throw ConfigError("SEM edge index out of range");
        }
        if (edge.cause == edge.effect) {
            throw DomainError("cyclic SEM specification: self-loop on variable " +
                              std::to_string(edge.cause));
        }
        if (!seen.emplace(edge.cause, edge.effect).second) {
            throw ConfigError("duplicate SEM edge");
        }
        children[edge.cause].push_back(edge.effect);
        ++indegree[edge.effect];
    }
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < spec.variables; ++v) {
        if (indegree[v] == 0) {
            ready.insert(v);
        }
    }
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        std::size_t v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (std::size_t child : children[v]) {
            if (--indegree[child] == 0) {
                ready.insert(child);
            }
        }
    }
    if (order.size() != spec.variables) {
        throw DomainError("cyclic SEM specification");
    }
    return order;
}

Sentence pairSentence(const Entity& a, const Entity& b) {
    return Sentence{{a.canonical, a.type}, {b.canonical, b.type}};
}

}  // namespace

const std::string& toString(NoiseFamily family) {
    static const std::string names[] = {"uniform", "laplace"};
    return names[static_cast<int>(family)];
}

SemSample generateSem(const SemSpec& spec, std::size_t n, std::uint64_t seed) {
    if (spec.variables == 0) {
        throw ConfigError("SEM needs at least one variable");
    }
    if (n == 0) {
        throw ConfigError("SEM sample count must be positive");
    }
    if (!spec.noiseScale.empty() && spec.noiseScale.size() != spec.variables) {
        throw ConfigError("noise scale list must match the variable count");
    }

    SemSample sample;
    sample.generatingOrder = topologicalOrder(spec);
    sample.strengths.assign(spec.variables, std::vector<double>(spec.variables, 0.0));
    for (const auto& edge : spec.edges) {
        sample.strengths[edge.effect][edge.cause] = edge.coefficient;
    }
    for (std::size_t v = 0; v < spec.variables; ++v) {
        sample.names.push_back("x" + std::to_string(v + 1));
    }
    sample.columns.assign(spec.variables, std::vector<double>(n, 0.0));

    const double uniformHalfWidth = 1.7320508075688772;  // unit variance
    std::mt19937_64 rng(seed);
    for (std::size_t v : sample.generatingOrder) {
        double scale = spec.noiseScale.empty() ? 1.0 : spec.noiseScale[v];
        for (std::size_t r = 0; r < n; ++r) {
            double noise = spec.noise == NoiseFamily::Uniform
                               ? (2.0 * nextUniform(rng) - 1.0) * uniformHalfWidth
                               : nextLaplace(rng);
            double value = scale * noise;
            for (std::size_t cause = 0; cause < spec.variables; ++cause) {
                double b = sample.strengths[v][cause];
                if (b != 0.0) {
                    value += b * sample.columns[cause][r];
                }
            }
            sample.columns[v][r] = value;
        }
    }
    return sample;
}

SyntheticCorpus generateSyntheticCorpus(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
    if (spec.years < 2) {
        throw ConfigError("synthetic corpus needs at least 2 years");
    }
    if (spec.papersPerYear < 5) {
        throw ConfigError("synthetic corpus needs at least 5 papers per year");
    }
    if (spec.otherTasks < 2) {
        throw ConfigError("synthetic corpus needs at least 2 background tasks");
    }

    const Entity target{"focal task", EntityType::Task};
    const Entity driver{"driver method", EntityType::Method};
    const Entity adversary{"shadow method", EntityType::Method};
    std::vector<Entity> tasks;
    for (std::size_t j = 0; j < spec.otherTasks; ++j) {
        tasks.push_back({"background task " + std::to_string(j + 1), EntityType::Task});
    }
    std::vector<Entity> methods;
    for (std::size_t k = 0; k < kBackgroundMethods; ++k) {
        methods.push_back({std::string("method ") + static_cast<char>('a' + k), EntityType::Method});
    }
    std::vector<Entity> datasets;
    for (std::size_t r = 0; r < kDatasets; ++r) {
        datasets.push_back({std::string("dataset ") + static_cast<char>('a' + r), EntityType::Dataset});
    }
    std::vector<Entity> metrics;
    for (std::size_t r = 0; r < kMetrics; ++r) {
        metrics.push_back({std::string("metric ") + static_cast<char>('a' + r), EntityType::Metric});
    }

    const std::size_t years = static_cast<std::size_t>(spec.years);
    const std::size_t maxTaskPapers = spec.papersPerYear - 2;  // one overview, one other paper

    // Target task share grows monotonically; the driver's co-occurrence
    // count follows it so the pair's dose-response relation is real. The
    // endpoints are pinned so the first-to-last change value is an exact
    // fraction.
    std::vector<std::size_t> taskPapers(years);
    std::vector<std::size_t> driverCounts(years);
    for (std::size_t i = 0; i < years; ++i) {
        double progress = static_cast<double>(i) / static_cast<double>(years - 1);
        taskPapers[i] = 1 + static_cast<std::size_t>(
                                std::lround(static_cast<double>(maxTaskPapers - 1) * progress));
    }
    for (std::size_t i = 0; i < years; ++i) {
        double span = static_cast<double>(taskPapers[i] - taskPapers[0]) /
                      static_cast<double>(taskPapers[years - 1] - taskPapers[0]);
        driverCounts[i] =
            kDriverLow + static_cast<std::size_t>(std::lround(
                             static_cast<double>(kDriverHigh - kDriverLow) * span));
    }

    std::mt19937_64 rng(seed);
    auto jitter = [&](std::size_t yearIdx) -> long {
        if (yearIdx == 0 || yearIdx + 1 == years) {
            return 0;  // boundary years stay exact
        }
        return static_cast<long>(rng() % 3) - 1;
    };
    auto jittered = [&](std::size_t base, std::size_t yearIdx) {
        long value = static_cast<long>(base) + jitter(yearIdx);
        return static_cast<std::size_t>(std::max(1L, value));
    };

    std::vector<PaperRecord> papers;
    char idBuffer[32];
    for (std::size_t i = 0; i < years; ++i) {
        int year = spec.startYear + static_cast<int>(i);
        std::size_t paperIdx = 0;
        auto nextId = [&]() {
            std::snprintf(idBuffer, sizeof(idBuffer), "p%d_%02zu", year, paperIdx++);
            return std::string(idBuffer);
        };

        for (std::size_t k = 0; k < taskPapers[i]; ++k) {
            PaperRecord paper;
            paper.id = nextId();
            paper.year = year;
            paper.sections.push_back({"title", {Sentence{{target.canonical, target.type}}}});
            paper.sections.push_back({"abstract", {Sentence{{target.canonical, target.type}}}});
            papers.push_back(std::move(paper));
        }
        std::size_t otherPapers = spec.papersPerYear - 1 - taskPapers[i];
        for (std::size_t k = 0; k < otherPapers; ++k) {
            const Entity& task = tasks[(k + i) % tasks.size()];
            PaperRecord paper;
            paper.id = nextId();
            paper.year = year;
            paper.sections.push_back({"title", {Sentence{{task.canonical, task.type}}}});
            paper.sections.push_back({"abstract", {Sentence{{task.canonical, task.type}}}});
            paper.sections.push_back(
                {"body", {pairSentence(task, datasets[(k + i) % datasets.size()])}});
            papers.push_back(std::move(paper));
        }

        // The overview paper carries the co-occurrence structure. Its
        // section is not consulted for task assignment.
        PaperRecord overview;
        overview.id = nextId();
        overview.year = year;
        Section body{"body", {}};
        auto addPairs = [&](const Entity& a, const Entity& b, std::size_t count) {
            for (std::size_t c = 0; c < count; ++c) {
                body.sentences.push_back(pairSentence(a, b));
            }
        };
        addPairs(target, driver, driverCounts[i]);
        // Background methods keep a constant count with the target: their
        // change value is identically zero, so only the driver's method
        // column survives into the causal ranking while all of them still
        // show up for the correlation baseline.
        for (const auto& method : methods) {
            addPairs(target, method, kMethodBase);
        }
        if (spec.adversary) {
            addPairs(target, adversary, kAdversaryCount);
        }
        for (const auto& dataset : datasets) {
            addPairs(target, dataset, jittered(kDatasetBase, i));
        }
        for (const auto& metric : metrics) {
            addPairs(target, metric, jittered(kMetricBase, i));
        }
        addPairs(target, tasks[0], jittered(kTaskBase, i));
        addPairs(target, tasks[1], jittered(kTaskBase, i));
        // Driver also occurs away from the target so its association stays
        // imperfect; the adversary never does.
        addPairs(driver, datasets[0], 4);
        addPairs(driver, metrics[0], 4);
        for (std::size_t j = 0; j < tasks.size(); ++j) {
            addPairs(tasks[j], tasks[(j + 1) % tasks.size()], jittered(kTaskBase, i));
            addPairs(tasks[j], datasets[j % kDatasets], jittered(kDatasetBase, i));
            addPairs(tasks[j], methods[j % kBackgroundMethods], jittered(kMethodBase, i));
            addPairs(tasks[j], metrics[j % kMetrics], jittered(kMetricBase, i));
        }
        overview.sections.push_back(std::move(body));
        papers.push_back(std::move(overview));
    }

    SyntheticCorpus result;
    result.corpus = Corpus(std::move(papers));
    result.truth.targetTask = target;
    result.truth.driver = driver;
    if (spec.adversary) {
        result.truth.adversary = adversary;
    }
    result.truth.firstYear = spec.startYear;
    result.truth.lastYear = spec.startYear + spec.years - 1;
    result.truth.taskPapersPerYear = taskPapers;
    result.truth.driverCooccurrences = driverCounts;

    // Method-type mass with the target in the two boundary years, from the
    // construction integers.
    std::size_t boundary = driverCounts.front() + driverCounts.back() +
                           2 * kBackgroundMethods * kMethodBase +
                           (spec.adversary ? 2 * kAdversaryCount : 0);
    result.truth.boundaryDelta =
        static_cast<double>(driverCounts.back() - driverCounts.front()) / static_cast<double>(boundary);
    return result;
}

void writeGroundTruthJson(const SyntheticCorpus& synthetic, const SemSpec* semSpec,
                          const SemSample* semSample, std::ostream& out) {
    Json doc;
    Json corpus;
    corpus["target_task"] = {{"canonical", synthetic.truth.targetTask.canonical},
                             {"type", toString(synthetic.truth.targetTask.type)}};
    corpus["driver"] = {{"canonical", synthetic.truth.driver.canonical},
                        {"type", toString(synthetic.truth.driver.type)}};
    if (synthetic.truth.adversary) {
        corpus["adversary"] = {{"canonical", synthetic.truth.adversary->canonical},
                               {"type", toString(synthetic.truth.adversary->type)}};
    } else {
        corpus["adversary"] = nullptr;
    }
    corpus["boundary_delta"] = synthetic.truth.boundaryDelta;
    corpus["first_year"] = synthetic.truth.firstYear;
    corpus["last_year"] = synthetic.truth.lastYear;
    corpus["task_papers_per_year"] = synthetic.truth.taskPapersPerYear;
    corpus["driver_cooccurrences"] = synthetic.truth.driverCooccurrences;
    doc["corpus"] = std::move(corpus);
    if (semSpec != nullptr && semSample != nullptr) {
        Json sem;
        sem["names"] = semSample->names;
        sem["noise"] = toString(semSpec->noise);
        sem["order"] = semSample->generatingOrder;
        Json edges = Json::array();
        for (const auto& edge : semSpec->edges) {
            edges.push_back(
                {{"cause", edge.cause}, {"effect", edge.effect}, {"coefficient", edge.coefficient}});
        }
        sem["edges"] = std::move(edges);
        sem["samples"] = semSample->columns.empty() ? 0 : semSample->columns.front().size();
        doc["sem"] = std::move(sem);
    } else {
        doc["sem"] = nullptr;
    }
    out << doc.dump() << '\n';
}

void writeMatrixCsv(const std::vector<std::string>& names,
                    const std::vector<std::vector<double>>& columns, std::ostream& out) {
    if (names.size() != columns.size()) {
        throw DomainError("matrix column names and columns differ in count");
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        out << (j ? "," : "") << csvEscape(names[j]);
    }
    out << '\n';
    std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            out << (j ? "," : "") << formatDouble(columns[j][r]);
        }
        out << '\n';
    }
}

}  // namespace scitrend
