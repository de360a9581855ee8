#include "scitrend/Causal.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>

#include <Eigen/Dense>

#include "scitrend/Errors.h"
#include "scitrend/Random.h"
#include "scitrend/Regression.h"
#include "scitrend/Util.h"

namespace scitrend {

namespace {

// Two-moment maximum-entropy approximation of the differential entropy of a
// standardized variable (log-cosh and Gaussian-weighted first moment).
constexpr double kEntropyK1 = 79.047;
constexpr double kEntropyK2 = 7.4129;
constexpr double kEntropyGamma = 0.37457;
constexpr double kGaussianEntropy = 1.4189385332046727;  // (1 + ln 2pi) / 2
constexpr double kFlatVariance = 1e-30;
constexpr std::size_t kMinEffectSamples = 30;

void requireFinite(const std::vector<double>& values, const std::string& name) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError("non-finite value in " + name);
        }
    }
}

double populationVariance(const std::vector<double>& values, double mean) {
    double sum = 0.0;
    for (double v : values) {
        sum += (v - mean) * (v - mean);
    }
    return sum / static_cast<double>(values.size());
}

double meanOf(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

std::optional<std::vector<double>> standardizeOrFlat(const std::vector<double>& values) {
    double mean = meanOf(values);
    double variance = populationVariance(values, mean);
    if (variance <= kFlatVariance) {
        return std::nullopt;
    }
    double scale = std::sqrt(variance);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = (values[i] - mean) / scale;
    }
    return out;
}

std::vector<double> standardize(const std::vector<double>& values, const std::string& name) {
    auto out = standardizeOrFlat(values);
    if (!out) {
        throw DomainError("zero-variance input: " + name);
    }
    return *std::move(out);
}

double entropyStandardized(const std::vector<double>& u) {
    double logCosh = 0.0;
    double gaussMoment = 0.0;
    for (double v : u) {
        logCosh += std::log(std::cosh(v));
        gaussMoment += v * std::exp(-0.5 * v * v);
    }
    double n = static_cast<double>(u.size());
    logCosh /= n;
    gaussMoment /= n;
    return kGaussianEntropy - kEntropyK1 * (logCosh - kEntropyGamma) * (logCosh - kEntropyGamma) -
           kEntropyK2 * gaussMoment * gaussMoment;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum / static_cast<double>(a.size());
}

// Log-likelihood difference between the two causal directions of a
// standardized pair; positive favors i -> j. The shared joint-entropy and
// scale terms cancel, leaving marginal plus residual entropies.
double directionStatistic(const std::vector<double>& xi, const std::vector<double>& xj) {
    double rho = correlation(xi, xj);
    std::vector<double> residJ(xi.size());
    std::vector<double> residI(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) {
        residJ[k] = xj[k] - rho * xi[k];
        residI[k] = xi[k] - rho * xj[k];
    }
    auto stdJ = standardizeOrFlat(residJ);
    auto stdI = standardizeOrFlat(residI);
    if (!stdJ || !stdI) {
        return 0.0;  // the pair is deterministic, no direction information
    }
    return (entropyStandardized(xj) + entropyStandardized(*stdI)) -
           (entropyStandardized(xi) + entropyStandardized(*stdJ));
}

std::vector<std::string> defaultNames(std::size_t p) {
    std::vector<std::string> names;
    names.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        names.push_back("x" + std::to_string(i + 1));
    }
    return names;
}

double normalPdf(double deviation, double sigma) {
    return std::exp(-0.5 * (deviation / sigma) * (deviation / sigma)) /
           (sigma * 2.50662827463100050242);
}

double quantileSorted(const std::vector<double>& sorted, double q) {
    // linear interpolation between order statistics
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double nearestRankSorted(const std::vector<double>& sorted, double q) {
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    if (rank == 0) {
        rank = 1;
    }
    if (rank > sorted.size()) {
        rank = sorted.size();
    }
    return sorted[rank - 1];
}

// Cox-de Boor basis value B_{i,degree}(t); the final nonempty interval is
// treated as closed so the right boundary gets full weight.
double basisValue(const std::vector<double>& knots, std::size_t i, int degree, double t) {
    if (degree == 0) {
        if (t == knots.back()) {
            return knots[i] < knots[i + 1] && knots[i + 1] == knots.back() ? 1.0 : 0.0;
        }
        return knots[i] <= t && t < knots[i + 1] ? 1.0 : 0.0;
    }
    double value = 0.0;
    double leftSpan = knots[i + degree] - knots[i];
    if (leftSpan > 0.0) {
        value += (t - knots[i]) / leftSpan * basisValue(knots, i, degree - 1, t);
    }
    double rightSpan = knots[i + degree + 1] - knots[i + 1];
    if (rightSpan > 0.0) {
        value += (knots[i + degree + 1] - t) / rightSpan * basisValue(knots, i + 1, degree - 1, t);
    }
    return value;
}

struct CubicSpline {
    std::vector<double> knots;
    std::vector<double> coefficients;

    std::size_t basisCount() const { return knots.size() - 4; }

    double value(double t) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
            sum += coefficients[i] * basisValue(knots, i, 3, t);
        }
        return sum;
    }

    double derivative(double t) const {
        // derivative of a cubic spline is a quadratic spline over the inner
        // knot vector with differenced coefficients
        std::vector<double> innerKnots(knots.begin() + 1, knots.end() - 1);
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < coefficients.size(); ++i) {
            double span = knots[i + 4] - knots[i + 1];
            if (span <= 0.0) {
                continue;
            }
            double d = 3.0 * (coefficients[i + 1] - coefficients[i]) / span;
            sum += d * basisValue(innerKnots, i, 2, t);
        }
        return sum;
    }
};

std::vector<double> clampedKnots(double lo, double hi, const std::vector<double>& interior) {
    std::vector<double> knots(4, lo);
    knots.insert(knots.end(), interior.begin(), interior.end());
    knots.insert(knots.end(), 4, hi);
    return knots;
}

}  // namespace

bool CausalGraph::edge(std::size_t cause, std::size_t effect) const {
    if (cause >= variables.size() || effect >= variables.size()) {
        throw DomainError("edge index out of range");
    }
    return significant[effect][cause];
}

std::size_t CausalGraph::edgeCount() const {
    std::size_t count = 0;
    for (const auto& row : significant) {
        for (bool flag : row) {
            count += flag;
        }
    }
    return count;
}

double mutualIndependenceScore(const std::vector<double>& x, const std::vector<double>& r) {
    if (x.size() != r.size()) {
        throw DomainError("mutual independence score requires equal-length vectors");
    }
    if (x.size() < 3) {
        throw DomainError("mutual independence score requires at least 3 observations");
    }
    requireFinite(x, "x");
    requireFinite(r, "r");
    auto xs = standardize(x, "x");
    auto rs = standardize(r, "r");
    double rho = correlation(xs, rs);
    double rho2 = std::min(rho * rho, 1.0 - 1e-12);

    std::vector<double> resid(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        resid[i] = rs[i] - rho * xs[i];
    }
    auto residStd = standardizeOrFlat(resid);
    double residEntropy = residStd ? entropyStandardized(*residStd) : kGaussianEntropy;
    double score = entropyStandardized(rs) - residEntropy - 0.5 * std::log1p(-rho2);
    return std::max(0.0, score);
}

CausalGraph directLingam(const std::vector<std::vector<double>>& columns, std::vector<std::string> names,
                         const LingamOptions& options) {
    const std::size_t p = columns.size();
    if (p == 0) {
        throw DomainError("structure discovery needs at least one variable");
    }
    if (names.empty()) {
        names = defaultNames(p);
    }
    if (names.size() != p) {
        throw ConfigError("got " + std::to_string(names.size()) + " names for " + std::to_string(p) +
                          " variables");
    }
    const std::size_t n = columns.front().size();
    for (std::size_t j = 0; j < p; ++j) {
        if (columns[j].size() != n) {
            throw DomainError("variable columns must have equal lengths");
        }
        requireFinite(columns[j], "column " + names[j]);
        if (populationVariance(columns[j], meanOf(columns[j])) <= kFlatVariance) {
            throw DomainError("constant column: " + names[j]);
        }
    }
    if (n < options.samplesPerVariable * p) {
        throw DomainError("need at least " + std::to_string(options.samplesPerVariable * p) +
                          " samples for " + std::to_string(p) + " variables, got " + std::to_string(n));
    }

    // Step 1-3 of the discovery: repeatedly pick the most exogenous variable
    // (all pairwise direction statistics nonnegative means no evidence
    // against it being a root), then work on the residuals.
    std::vector<std::vector<double>> work = columns;
    std::vector<std::size_t> remaining(p);
    for (std::size_t i = 0; i < p; ++i) {
        remaining[i] = i;
    }
    std::vector<std::size_t> order;
    while (remaining.size() > 1) {
        std::map<std::size_t, std::vector<double>> standardized;
        for (std::size_t idx : remaining) {
            if (auto s = standardizeOrFlat(work[idx])) {
                standardized.emplace(idx, *std::move(s));
            }
        }
        std::size_t root = remaining.front();
        if (!standardized.empty()) {
            double bestScore = 0.0;
            bool haveBest = false;
            for (std::size_t i : remaining) {
                auto si = standardized.find(i);
                if (si == standardized.end()) {
                    continue;
                }
                double total = 0.0;
                for (std::size_t j : remaining) {
                    if (i == j) {
                        continue;
                    }
                    auto sj = standardized.find(j);
                    if (sj == standardized.end()) {
                        continue;
                    }
                    double delta = directionStatistic(si->second, sj->second);
                    double deficit = std::min(0.0, delta);
                    total += deficit * deficit;
                }
                if (!haveBest || total < bestScore) {
                    bestScore = total;
                    haveBest = true;
                    root = i;
                }
            }
        }
        order.push_back(root);
        double rootMean = meanOf(work[root]);
        double rootVar = populationVariance(work[root], rootMean);
        for (std::size_t j : remaining) {
            if (j == root || rootVar <= kFlatVariance) {
                continue;
            }
            double jMean = meanOf(work[j]);
            double cov = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                cov += (work[j][k] - jMean) * (work[root][k] - rootMean);
            }
            cov /= static_cast<double>(n);
            double beta = cov / rootVar;
            for (std::size_t k = 0; k < n; ++k) {
                work[j][k] -= beta * work[root][k];
            }
        }
        remaining.erase(std::find(remaining.begin(), remaining.end(), root));
    }
    order.push_back(remaining.front());

    // Step 4: connection strengths by least squares on the original data,
    // each variable regressed on everything earlier in the ordering.
    CausalGraph graph;
    graph.variables = std::move(names);
    graph.order = order;
    graph.samples = n;
    graph.significance = options.significance;
    graph.strengths.assign(p, std::vector<double>(p, 0.0));
    graph.pValues.assign(p, std::vector<double>(p, 1.0));
    graph.significant.assign(p, std::vector<bool>(p, false));

    struct CandidateEdge {
        double pValue;
        std::size_t effect;
        std::size_t cause;
    };
    std::vector<CandidateEdge> candidates;
    for (std::size_t m = 1; m < p; ++m) {
        std::size_t effect = order[m];
        std::vector<std::vector<double>> regressors;
        std::vector<std::string> regressorNames;
        for (std::size_t j = 0; j < m; ++j) {
            regressors.push_back(columns[order[j]]);
            regressorNames.push_back(graph.variables[order[j]]);
        }
        RegressionFit fit = fitOls(regressors, columns[effect], regressorNames);
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t cause = order[j];
            graph.strengths[effect][cause] = fit.coefficients[j];
            graph.pValues[effect][cause] = fit.pValues[j];
            candidates.push_back({fit.pValues[j], effect, cause});
        }
    }

    // Holm step-down correction, controlling the familywise error across all
    // candidate edges at the configured level.
    std::sort(candidates.begin(), candidates.end(), [](const CandidateEdge& a, const CandidateEdge& b) {
        if (a.pValue != b.pValue) {
            return a.pValue < b.pValue;
        }
        if (a.effect != b.effect) {
            return a.effect < b.effect;
        }
        return a.cause < b.cause;
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double threshold = options.significance / static_cast<double>(candidates.size() - i);
        if (candidates[i].pValue > threshold) {
            break;
        }
        graph.significant[candidates[i].effect][candidates[i].cause] = true;
    }
    return graph;
}

EdgeStability sensitivityAnalysis(const std::vector<std::vector<double>>& columns,
                                  const std::vector<std::size_t>& noiseColumns,
                                  std::vector<std::string> names, const SensitivityOptions& options) {
    if (options.trials < 10) {
        throw ConfigError("sensitivity analysis needs at least 10 trials");
    }
    const std::size_t p = columns.size();
    if (names.empty()) {
        names = defaultNames(p);
    }
    std::set<std::size_t> noisy(noiseColumns.begin(), noiseColumns.end());
    for (std::size_t idx : noisy) {
        if (idx >= p) {
            throw ConfigError("noise column index " + std::to_string(idx) + " out of range");
        }
    }

    EdgeStability stability;
    stability.variables = names;
    stability.trials = options.trials;
    std::vector<std::vector<std::size_t>> counts(p, std::vector<std::size_t>(p, 0));
    std::string lastFailure;
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        std::mt19937_64 rng(deriveSeed(options.seed, trial));
        auto perturbed = columns;
        for (std::size_t idx : noisy) {
            for (double& v : perturbed[idx]) {
                v += nextGaussian(rng);
            }
        }
        try {
            CausalGraph graph = directLingam(perturbed, names, options.lingam);
            for (std::size_t effect = 0; effect < p; ++effect) {
                for (std::size_t cause = 0; cause < p; ++cause) {
                    counts[effect][cause] += graph.significant[effect][cause];
                }
            }
        } catch (const Error& e) {
            ++stability.failedTrials;
            lastFailure = e.what();
        }
    }
    std::size_t successful = options.trials - stability.failedTrials;
    if (successful == 0) {
        throw DomainError("all sensitivity trials failed; last error: " + lastFailure);
    }
    stability.probability.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t effect = 0; effect < p; ++effect) {
        for (std::size_t cause = 0; cause < p; ++cause) {
            stability.probability[effect][cause] =
                static_cast<double>(counts[effect][cause]) / static_cast<double>(successful);
        }
    }
    return stability;
}

double TreatmentDensity::pdf(double t) const {
    if (coefficients.size() != 1) {
        throw DomainError("density was fitted with covariates; pass covariate values");
    }
    return normalPdf(t - coefficients.front(), sigma);
}

double TreatmentDensity::pdf(double t, const std::vector<double>& covariates) const {
    if (covariates.size() + 1 != coefficients.size()) {
        throw DomainError("expected " + std::to_string(coefficients.size() - 1) + " covariate values");
    }
    double mean = coefficients.front();
    for (std::size_t j = 0; j < covariates.size(); ++j) {
        mean += coefficients[j + 1] * covariates[j];
    }
    return normalPdf(t - mean, sigma);
}

TreatmentDensity estimateTreatmentDensity(const std::vector<double>& treatment,
                                          const std::vector<std::vector<double>>& covariates) {
    const std::size_t n = treatment.size();
    if (n < kMinEffectSamples) {
        throw DomainError("density estimation needs at least " + std::to_string(kMinEffectSamples) +
                          " samples, got " + std::to_string(n));
    }
    requireFinite(treatment, "treatment");

    TreatmentDensity density;
    density.samples = n;
    std::vector<double> residuals(n);
    if (covariates.empty()) {
        double mean = meanOf(treatment);
        density.coefficients = {mean};
        for (std::size_t i = 0; i < n; ++i) {
            residuals[i] = treatment[i] - mean;
        }
    } else {
        RegressionFit fit = fitOls(covariates, treatment);
        density.coefficients.reserve(covariates.size() + 1);
        density.coefficients.push_back(fit.intercept);
        density.coefficients.insert(density.coefficients.end(), fit.coefficients.begin(),
                                    fit.coefficients.end());
        residuals = fit.residuals;
    }
    double variance = 0.0;  // maximum-likelihood scale, residuals have zero mean
    for (double r : residuals) {
        variance += r * r;
    }
    variance /= static_cast<double>(n);
    if (variance <= kFlatVariance) {
        throw DomainError("zero residual variance; treatment has no spread to model");
    }
    density.sigma = std::sqrt(variance);
    density.sampleDensities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        density.sampleDensities[i] = normalPdf(residuals[i], density.sigma);
    }
    return density;
}

EffectEstimate splineEffect(const std::vector<double>& treatment, const std::vector<double>& outcome,
                            const std::vector<double>& densities, const SplineOptions& options,
                            const std::string& treatmentLabel, const std::string& outcomeLabel) {
    const std::size_t n = treatment.size();
    if (outcome.size() != n || densities.size() != n) {
        throw DomainError("treatment, outcome, and densities must have equal lengths");
    }
    if (n < kMinEffectSamples) {
        throw DomainError("effect estimation needs at least " + std::to_string(kMinEffectSamples) +
                          " samples, got " + std::to_string(n));
    }
    if (options.gridSize < 2) {
        throw ConfigError("effect grid needs at least 2 points");
    }
    requireFinite(treatment, "treatment");
    requireFinite(outcome, "outcome");
    for (double d : densities) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw DomainError("density must be positive at every sample point");
        }
    }

    EffectEstimate estimate;
    estimate.treatment = treatmentLabel;
    estimate.outcome = outcomeLabel;
    estimate.samples = n;

    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        weights[i] = 1.0 / densities[i];
    }
    std::vector<double> sortedWeights = weights;
    std::sort(sortedWeights.begin(), sortedWeights.end());
    estimate.weightClip = nearestRankSorted(sortedWeights, options.weightClipQuantile);
    estimate.weightMin = sortedWeights.front();
    for (double& w : weights) {
        w = std::min(w, estimate.weightClip);
    }
    estimate.weightMax = *std::max_element(weights.begin(), weights.end());

    auto [loIt, hiIt] = std::minmax_element(treatment.begin(), treatment.end());
    double lo = *loIt;
    double hi = *hiIt;
    if (hi - lo < 1e-12) {
        throw DomainError("constant treatment; dose-response is undefined");
    }

    std::vector<double> sortedTreatment = treatment;
    std::sort(sortedTreatment.begin(), sortedTreatment.end());
    std::vector<double> interior;
    for (std::size_t i = 1; i <= options.interiorKnots; ++i) {
        double q = static_cast<double>(i) / static_cast<double>(options.interiorKnots + 1);
        double knot = quantileSorted(sortedTreatment, q);
        if (knot > lo && knot < hi && (interior.empty() || knot > interior.back())) {
            interior.push_back(knot);
        }
    }

    // Tied treatments can leave empty spline spans; retry with fewer knots
    // before giving up.
    CubicSpline spline;
    bool fitted = false;
    for (std::size_t knotCount : {interior.size(), interior.size() / 2, std::size_t{0}}) {
        std::vector<double> tryInterior(interior.begin(), interior.begin() + knotCount);
        auto knots = clampedKnots(lo, hi, tryInterior);
        std::size_t nBasis = knots.size() - 4;

        Eigen::MatrixXd design(n, nBasis);
        Eigen::VectorXd target(n);
        for (std::size_t i = 0; i < n; ++i) {
            double sw = std::sqrt(weights[i]);
            for (std::size_t b = 0; b < nBasis; ++b) {
                design(i, b) = sw * basisValue(knots, b, 3, treatment[i]);
            }
            target(i) = sw * outcome[i];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < static_cast<Eigen::Index>(nBasis)) {
            continue;
        }
        Eigen::VectorXd solution = qr.solve(target);
        spline.knots = knots;
        spline.coefficients.assign(solution.data(), solution.data() + nBasis);
        fitted = true;
        break;
    }
    if (!fitted) {
        throw DomainError("spline design is rank deficient even without interior knots");
    }

    estimate.grid.resize(options.gridSize);
    estimate.curve.resize(options.gridSize);
    double derivativeSum = 0.0;
    for (std::size_t g = 0; g < options.gridSize; ++g) {
        double t = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(options.gridSize - 1);
        estimate.grid[g] = t;
        estimate.curve[g] = spline.value(t);
        derivativeSum += spline.derivative(t);
    }
    estimate.scalarEffect = derivativeSum / static_cast<double>(options.gridSize);
    return estimate;
}

const std::string& toString(EffectOutcome outcome) {
    static const std::string names[] = {"freq_shift", "stability"};
    return names[static_cast<int>(outcome)];
}

EffectOutcome effectOutcomeFromString(const std::string& text) {
    for (EffectOutcome outcome : {EffectOutcome::FrequencyShift, EffectOutcome::Stability}) {
        if (text == toString(outcome)) {
            return outcome;
        }
    }
    throw ConfigError("unknown outcome \"" + text + "\" (expected freq_shift or stability)");
}

RankedCauses rankCauses(const Corpus& corpus, const Entity& task, const Period& period,
                        const SpacesByYear* spaces, const RankOptions& options) {
    if (task.type != EntityType::Task) {
        throw DomainError("rank_causes expects a task entity");
    }
    RankedCauses result;
    result.task = task;
    result.period = period;
    result.outcome = options.outcome;
    for (EntityType type : kEntityTypes) {
        result.byType[type] = {};
    }

    std::vector<int> years;
    for (const auto& [year, count] : corpus.yearIndex()) {
        if (period.contains(year)) {
            years.push_back(year);
        }
    }
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < years.size(); ++i) {
        for (std::size_t j = i + 1; j < years.size(); ++j) {
            pairs.emplace_back(years[i], years[j]);
        }
    }
    result.yearPairs = pairs.size();
    if (pairs.empty()) {
        return result;
    }

    std::map<int, double> frequency;
    for (int year : years) {
        auto counts = countTaskPapers(corpus, year, options.taskSections);
        auto it = counts.find(task);
        frequency[year] = static_cast<double>(it == counts.end() ? 0 : it->second) /
                          static_cast<double>(corpus.paperCount(year));
    }
    if (options.outcome == EffectOutcome::Stability && spaces == nullptr) {
        throw ConfigError("stability outcome requires embedding spaces");
    }

    std::vector<std::optional<double>> outcomes(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [t1, t2] = pairs[i];
        if (options.outcome == EffectOutcome::FrequencyShift) {
            outcomes[i] = (frequency[t2] - frequency[t1]) / static_cast<double>(t2 - t1);
        } else {
            auto s1 = spaces->find(t1);
            auto s2 = spaces->find(t2);
            if (s1 != spaces->end() && s2 != spaces->end() && s1->second.contains(task) &&
                s2->second.contains(task) && options.neighbors + 1 <= s1->second.size() &&
                options.neighbors + 1 <= s2->second.size()) {
                outcomes[i] = taskStability(s1->second, s2->second, task, options.neighbors);
            }
        }
    }

    auto table = cooccurrencesWithTask(corpus, task);
    static const std::map<Entity, std::size_t> kEmpty;
    auto countsAt = [&](int year) -> const std::map<Entity, std::size_t>& {
        auto it = table.find(year);
        return it == table.end() ? kEmpty : it->second;
    };

    // Per-pair, per-type normalization mass.
    std::vector<std::map<EntityType, double>> denominators(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (int year : {pairs[i].first, pairs[i].second}) {
            for (const auto& [entity, count] : countsAt(year)) {
                denominators[i][entity.type] += static_cast<double>(count);
            }
        }
    }

    std::map<Entity, std::size_t> totalCooccurrence;
    for (int year : years) {
        for (const auto& [entity, count] : countsAt(year)) {
            totalCooccurrence[entity] += count;
        }
    }

    for (const auto& [candidate, total] : totalCooccurrence) {
        std::vector<double> doses;
        std::vector<double> responses;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (!outcomes[i]) {
                continue;
            }
            auto denomIt = denominators[i].find(candidate.type);
            if (denomIt == denominators[i].end() || denomIt->second <= 0.0) {
                continue;
            }
            const auto& first = countsAt(pairs[i].first);
            const auto& second = countsAt(pairs[i].second);
            auto c1It = first.find(candidate);
            auto c2It = second.find(candidate);
            double c1 = c1It == first.end() ? 0.0 : static_cast<double>(c1It->second);
            double c2 = c2It == second.end() ? 0.0 : static_cast<double>(c2It->second);
            doses.push_back(std::abs(c1 - c2) / denomIt->second);
            responses.push_back(*outcomes[i]);
        }
        if (doses.size() < std::max(options.minSamples, kMinEffectSamples)) {
            continue;
        }
        try {
            TreatmentDensity density = estimateTreatmentDensity(doses);
            EffectEstimate effect = splineEffect(doses, responses, density.sampleDensities,
                                                 options.spline, candidate.canonical,
                                                 toString(options.outcome));
            result.byType[candidate.type].push_back(
                {candidate, effect.scalarEffect, total, doses.size()});
        } catch (const DomainError&) {
            // degenerate dose series (constant, no spread); candidate skipped
        }
    }

    for (auto& [type, entries] : result.byType) {
        std::sort(entries.begin(), entries.end(), [](const RankedCause& a, const RankedCause& b) {
            double ma = std::abs(a.scalarEffect);
            double mb = std::abs(b.scalarEffect);
            if (ma != mb) {
                return ma > mb;
            }
            if (a.cooccurrence != b.cooccurrence) {
                return a.cooccurrence > b.cooccurrence;
            }
            return a.entity < b.entity;
        });
        if (entries.size() > options.topK) {
            entries.resize(options.topK);
        }
    }
    return result;
}

void writeCausalGraphJson(const CausalGraph& graph, std::ostream& out) {
    out << "{\"variables\":[";
    for (std::size_t i = 0; i < graph.variables.size(); ++i) {
        out << (i ? "," : "") << '"' << graph.variables[i] << '"';
    }
    out << "],\"order\":[";
    for (std::size_t i = 0; i < graph.order.size(); ++i) {
        out << (i ? "," : "") << graph.order[i];
    }
    out << "],\"samples\":" << graph.samples << ",\"significance\":" << formatDouble(graph.significance);
    auto writeMatrix = [&](const char* key, auto getter) {
        out << ",\"" << key << "\":[";
        for (std::size_t r = 0; r < graph.variables.size(); ++r) {
            out << (r ? "," : "") << '[';
            for (std::size_t c = 0; c < graph.variables.size(); ++c) {
                out << (c ? "," : "") << getter(r, c);
            }
            out << ']';
        }
        out << ']';
    };
    writeMatrix("strengths", [&](std::size_t r, std::size_t c) { return formatDouble(graph.strengths[r][c]); });
    writeMatrix("p_values", [&](std::size_t r, std::size_t c) { return formatDouble(graph.pValues[r][c]); });
    writeMatrix("significant",
                [&](std::size_t r, std::size_t c) { return graph.significant[r][c] ? "true" : "false"; });
    out << "}\n";
}

void writeEdgeListCsv(const CausalGraph& graph, std::ostream& out) {
    out << "cause,effect,strength,p_value,significant\n";
    for (std::size_t m = 1; m < graph.order.size(); ++m) {
        std::size_t effect = graph.order[m];
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t cause = graph.order[j];
            out << csvEscape(graph.variables[cause]) << ',' << csvEscape(graph.variables[effect]) << ','
                << formatDouble(graph.strengths[effect][cause]) << ','
                << formatDouble(graph.pValues[effect][cause]) << ','
                << (graph.significant[effect][cause] ? '1' : '0') << '\n';
        }
    }
}

void writeEdgeStabilityCsv(const EdgeStability& stability, std::ostream& out) {
    out << "cause,effect,probability\n";
    for (std::size_t effect = 0; effect < stability.variables.size(); ++effect) {
        for (std::size_t cause = 0; cause < stability.variables.size(); ++cause) {
            if (cause == effect) {
                continue;
            }
            out << csvEscape(stability.variables[cause]) << ',' << csvEscape(stability.variables[effect])
                << ',' << formatDouble(stability.probability[effect][cause]) << '\n';
        }
    }
}

void writeEffectCurveCsv(const EffectEstimate& estimate, std::ostream& out) {
    out << "treatment,mu\n";
    for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
        out << formatDouble(estimate.grid[i]) << ',' << formatDouble(estimate.curve[i]) << '\n';
    }
}

}  // namespace scitrend
