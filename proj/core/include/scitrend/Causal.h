#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scitrend/Corpus.h"
#include "scitrend/Embeddings.h"
#include "scitrend/Variables.h"

namespace scitrend {

// Result of structure discovery. `order` lists variable indices from most
// exogenous to most endogenous; strengths[effect][cause] is nonzero only
// when cause precedes effect in that order (strictly lower triangular under
// the ordering). Edges whose coefficient fails the significance test stay in
// `strengths` but are flagged false in `significant`.
struct CausalGraph {
    std::vector<std::string> variables;
    std::vector<std::size_t> order;
    std::vector<std::vector<double>> strengths;
    std::vector<std::vector<double>> pValues;
    std::vector<std::vector<bool>> significant;
    std::size_t samples = 0;
    double significance = 0.05;

    bool edge(std::size_t cause, std::size_t effect) const;
    std::size_t edgeCount() const;
};

// Per-edge survival frequency under repeated noise injection.
struct EdgeStability {
    std::vector<std::string> variables;
    std::vector<std::vector<double>> probability;  // [effect][cause]
    std::size_t trials = 0;
    std::size_t failedTrials = 0;
};

// Normal model of a treatment variable: optional linear dependence on
// covariates, residual fitted as a zero-mean normal. Intercept-only when no
// covariates are given.
struct TreatmentDensity {
    std::vector<double> coefficients;  // intercept first
    double sigma = 0.0;
    std::vector<double> sampleDensities;
    std::size_t samples = 0;

    double pdf(double t) const;
    double pdf(double t, const std::vector<double>& covariates) const;
};

// Dose-response curve of an outcome against a treatment.
struct EffectEstimate {
    std::string treatment;
    std::string outcome;
    std::vector<double> grid;
    std::vector<double> curve;
    double scalarEffect = 0.0;  // mean curve derivative over the grid
    double weightMin = 0.0;
    double weightMax = 0.0;  // after clipping
    double weightClip = 0.0;
    std::size_t samples = 0;
};

// Mutual-information proxy between x and a residual series r: differential
// entropies of the standardized variables via a two-moment maximum-entropy
// approximation, joint entropy via the linear decomposition of r on x.
// Nonnegative; 0 when the estimator sees the pair as independent.
double mutualIndependenceScore(const std::vector<double>& x, const std::vector<double>& r);

struct LingamOptions {
    double significance = 0.05;          // familywise level for edge pruning
    std::size_t samplesPerVariable = 20;  // n must be >= this times p
};

// Structure discovery for a linear non-Gaussian acyclic model: repeatedly
// pick the variable most independent of the residuals of regressing the
// others on it, append it to the ordering, recurse on those residuals, then
// estimate connection strengths by least squares in that ordering and prune
// edges via a familywise 5%-level test (Holm) across all candidate edges.
// `columns` holds one vector per variable.
CausalGraph directLingam(const std::vector<std::vector<double>>& columns,
                         std::vector<std::string> names = {}, const LingamOptions& options = {});

struct SensitivityOptions {
    std::size_t trials = 50;
    std::uint64_t seed = 1;
    LingamOptions lingam;
};

// Re-runs discovery on copies of the data with standard normal noise added
// to the given columns; edge probability = fraction of successful trials
// retaining the edge. Deterministic for a given seed.
EdgeStability sensitivityAnalysis(const std::vector<std::vector<double>>& columns,
                                  const std::vector<std::size_t>& noiseColumns,
                                  std::vector<std::string> names, const SensitivityOptions& options = {});

TreatmentDensity estimateTreatmentDensity(const std::vector<double>& treatment,
                                          const std::vector<std::vector<double>>& covariates = {});

struct SplineOptions {
    std::size_t gridSize = 101;
    std::size_t interiorKnots = 4;  // placed at treatment quintiles
    double weightClipQuantile = 0.99;
};

// Inverse-probability-weighted cubic spline regression of outcome on
// treatment; weights 1/density clipped at the configured quantile. The
// fitted curve is sampled on an even grid over the observed treatment range.
EffectEstimate splineEffect(const std::vector<double>& treatment, const std::vector<double>& outcome,
                            const std::vector<double>& densities, const SplineOptions& options = {},
                            const std::string& treatmentLabel = "treatment",
                            const std::string& outcomeLabel = "outcome");

enum class EffectOutcome { FrequencyShift, Stability };

const std::string& toString(EffectOutcome outcome);
EffectOutcome effectOutcomeFromString(const std::string& text);

struct RankOptions {
    std::size_t topK = 5;
    std::size_t minSamples = 30;  // complete rows per candidate, else "-"
    EffectOutcome outcome = EffectOutcome::FrequencyShift;
    std::size_t neighbors = 5;
    SplineOptions spline;
    std::vector<std::string> taskSections = defaultTaskSections();
};

struct RankedCause {
    Entity entity;
    double scalarEffect = 0.0;
    std::size_t cooccurrence = 0;  // total with the task over the period
    std::size_t samples = 0;       // complete rows behind the estimate
};

// Ranked candidate causes of a task's outcome variable within one period.
// A type's empty list means not enough data (rendered as "-" in reports).
struct RankedCauses {
    Entity task;
    Period period;
    EffectOutcome outcome = EffectOutcome::FrequencyShift;
    std::map<EntityType, std::vector<RankedCause>> byType;
    std::size_t yearPairs = 0;
};

// Candidate entities are those co-occurring with the task inside the period;
// each gets a per-year-pair change series whose effect on the task's outcome
// is estimated with the IPW spline. Ranking is by |scalar effect|, ties by
// higher co-occurrence, then lexicographic. `spaces` may be null unless the
// outcome is stability.
RankedCauses rankCauses(const Corpus& corpus, const Entity& task, const Period& period,
                        const SpacesByYear* spaces = nullptr, const RankOptions& options = {});

void writeCausalGraphJson(const CausalGraph& graph, std::ostream& out);
void writeEdgeListCsv(const CausalGraph& graph, std::ostream& out);
void writeEdgeStabilityCsv(const EdgeStability& stability, std::ostream& out);
void writeEffectCurveCsv(const EffectEstimate& estimate, std::ostream& out);

}  // namespace scitrend
