#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scitrend/Baseline.h"
#include "scitrend/Causal.h"
#include "scitrend/Corpus.h"
#include "scitrend/Embeddings.h"
#include "scitrend/Regression.h"
#include "scitrend/Variables.h"

namespace scitrend {

inline constexpr char kVersion[] = "0.1.0";

const std::vector<Period>& defaultPeriods();

// Everything the pipeline needs, with conservative defaults. `seed` has no
// default on purpose: every run must name its randomness.
struct PipelineConfig {
    std::filesystem::path corpusPath;
    std::filesystem::path outDir = "out";
    std::string configSource;  // raw config text, kept for provenance hashing

    std::vector<Period> periods = defaultPeriods();
    std::vector<std::string> tasks;  // canonical names; empty selects top autoTasks
    std::size_t autoTasks = 8;
    bool filterRare = true;
    std::size_t minPapers = 5;
    ParseOptions parse;

    SgnsConfig sgns;
    ChangeAggregation aggregation = ChangeAggregation::Mean;
    std::size_t neighbors = 5;
    std::size_t minSamples = 30;
    std::size_t topK = 5;
    std::size_t sensitivityTrials = 50;
    double significance = 0.05;
    EffectOutcome rankOutcome = EffectOutcome::FrequencyShift;
    std::vector<std::string> taskSections = defaultTaskSections();
    std::optional<std::uint64_t> seed;
};

PipelineConfig pipelineConfigFromKeyValues(const std::map<std::string, std::string>& keyValues);
PipelineConfig loadPipelineConfig(const std::filesystem::path& path);

// Throws ConfigError before any work when the config violates an invariant
// (missing corpus, overlapping periods, absent seed, ...).
void validatePipelineConfig(const PipelineConfig& config);

// Canonical key=value rendering of the effective config; its hash is the
// report's provenance fingerprint.
std::string canonicalConfigText(const PipelineConfig& config);

struct PeriodRegression {
    Period period;
    std::vector<EntityType> regressors;
    std::optional<RegressionFit> fit;
    std::string note;  // set when the fit is absent
};

struct TaskPeriodAnalysis {
    RankedCauses causal;
    std::map<EntityType, std::vector<BaselineRankEntry>> baseline;
};

struct ManifestEntry {
    std::string stage;
    std::string inputHash;
    std::string outputHash;
};

// Full pipeline result: structured analysis plus pre-rendered export
// artifacts (filename -> content) and the stage manifest. Rendering happens
// during the run so file hashes in the manifest match the files on disk.
struct Report {
    std::uint64_t configHash = 0;
    std::string configEcho;
    std::uint64_t seed = 0;
    std::string version;

    std::size_t papersTotal = 0;
    std::size_t entitiesBeforeFilter = 0;
    std::size_t entitiesAfterFilter = 0;
    int minYear = 0;
    int maxYear = 0;
    int windowStart = 0;
    int windowEnd = 0;
    std::vector<Entity> tasks;
    std::vector<int> embeddedYears;
    std::size_t truncatedDocs = 0;

    std::vector<PeriodRegression> regressions;
    std::vector<VariableSample> samples;
    std::size_t completeSamples = 0;

    std::optional<CausalGraph> graph;
    std::string graphNote;
    std::optional<EdgeStability> edgeStability;
    std::string sensitivityNote;
    std::vector<EffectEstimate> effects;
    std::vector<std::string> effectNotes;
    std::vector<TaskPeriodAnalysis> analyses;
    std::optional<double> pearsonFreqStability;
    std::string pearsonNote;
    std::vector<std::string> divergences;

    std::map<std::string, std::string> artifacts;
    std::vector<ManifestEntry> manifest;
};

// Executes ingest, filter, task selection, per-year embeddings, variable
// assembly, trend regression, structure discovery, sensitivity, effect
// estimation, cause ranking, and baselines. Pure compute apart from reading
// the corpus file; stage failures surface as StageError.
Report runPipeline(const PipelineConfig& config);

// Writes the report artifacts for the requested formats (any of md, csv,
// json) plus manifest.tsv. On failure every file written so far is removed.
// Returns the written paths.
std::vector<std::filesystem::path> emitReport(const Report& report, const std::filesystem::path& outDir,
                                              const std::vector<std::string>& formats);

}  // namespace scitrend
