#include "scitrend/Regression.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "scitrend/Errors.h"

namespace scitrend {

namespace {

constexpr double kRankTolerance = 1e-10;

std::string columnName(const std::vector<std::string>& names, std::size_t j) {
    if (j == 0) {
        return "intercept";
    }
    if (j - 1 < names.size()) {
        return names[j - 1];
    }
    return "x" + std::to_string(j);
}

}  // namespace

double twoSidedTPValue(double tStatistic, double degreesOfFreedom) {
    if (std::isnan(tStatistic)) {
        return 1.0;
    }
    if (std::isinf(tStatistic)) {
        return 0.0;
    }
    boost::math::students_t dist(degreesOfFreedom);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(tStatistic)));
}

std::vector<double> RegressionFit::predictions(const std::vector<std::vector<double>>& columns) const {
    if (columns.size() != coefficients.size()) {
        throw DomainError("prediction requires one column per coefficient");
    }
    std::size_t n = columns.empty() ? samples : columns.front().size();
    std::vector<double> out(n, intercept);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n) {
            throw DomainError("prediction columns must have equal lengths");
        }
        for (std::size_t r = 0; r < n; ++r) {
            out[r] += coefficients[j] * columns[j][r];
        }
    }
    return out;
}

RegressionFit fitOls(const std::vector<std::vector<double>>& columns, const std::vector<double>& target,
                     const std::vector<std::string>& names) {
    const std::size_t n = target.size();
    const std::size_t k = columns.size();
    for (const auto& column : columns) {
        if (column.size() != n) {
            throw DomainError("design columns must match the target length");
        }
    }
    if (n < k + 2) {
        throw DomainError("need more rows than columns: " + std::to_string(n) + " rows for " +
                          std::to_string(k + 1) + " coefficients");
    }

    Eigen::MatrixXd x(n, k + 1);
    Eigen::VectorXd y(n);
    for (std::size_t r = 0; r < n; ++r) {
        x(r, 0) = 1.0;
        y(r) = target[r];
        for (std::size_t j = 0; j < k; ++j) {
            x(r, j + 1) = columns[j][r];
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(kRankTolerance);
    const auto p = static_cast<Eigen::Index>(k + 1);
    if (qr.rank() < p) {
        std::string collinear;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < p; ++i) {
            if (!collinear.empty()) {
                collinear += ", ";
            }
            collinear += columnName(names, static_cast<std::size_t>(perm(i)));
        }
        throw DomainError("design matrix is rank deficient; collinear columns: " + collinear);
    }

    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - x * beta;

    const double df = static_cast<double>(n) - static_cast<double>(k) - 1.0;
    const double ssRes = resid.squaredNorm();
    const double sigma2 = ssRes / df;

    Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    Eigen::MatrixXd rInv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd xtxInv = qr.colsPermutation() * (rInv * rInv.transpose()) *
                             qr.colsPermutation().transpose();

    RegressionFit fit;
    fit.samples = n;
    fit.intercept = beta(0);
    fit.coefficients.resize(k);
    fit.standardErrors.resize(k);
    fit.pValues.resize(k);
    fit.residuals.assign(resid.data(), resid.data() + n);

    auto coefficientStats = [&](Eigen::Index j, double& stdError, double& pValue) {
        double variance = sigma2 * std::max(xtxInv(j, j), 0.0);
        stdError = std::sqrt(variance);
        if (stdError == 0.0) {
            pValue = beta(j) == 0.0 ? 1.0 : 0.0;
        } else {
            pValue = twoSidedTPValue(beta(j) / stdError, df);
        }
    };
    coefficientStats(0, fit.interceptStdError, fit.interceptPValue);
    for (std::size_t j = 0; j < k; ++j) {
        fit.coefficients[j] = beta(j + 1);
        coefficientStats(static_cast<Eigen::Index>(j + 1), fit.standardErrors[j], fit.pValues[j]);
    }

    double mean = y.mean();
    double ssTot = (y.array() - mean).square().sum();
    fit.rSquared = ssTot > 0.0 ? 1.0 - ssRes / ssTot : 1.0;
    return fit;
}

DesignMatrix buildTrendDesign(const Corpus& corpus, int startYear, int endYear,
                              const std::vector<EntityType>& types) {
    if (types.empty()) {
        throw ConfigError("trend design needs at least one regressor type");
    }
    std::set<EntityType> seen(types.begin(), types.end());
    if (seen.size() != types.size()) {
        throw ConfigError("trend design regressor types must be distinct");
    }
    if (startYear > endYear) {
        throw DomainError("invalid year range");
    }
    const std::size_t yearCount = static_cast<std::size_t>(endYear - startYear) + 1;
    if (yearCount < types.size() + 2) {
        throw DomainError("year range covers " + std::to_string(yearCount) + " years; need at least " +
                          std::to_string(types.size() + 2) + " for " + std::to_string(types.size()) +
                          " regressors");
    }

    // First year each entity appears, then cumulative counts by binary search.
    std::map<EntityType, std::vector<int>> firstYears;
    {
        std::map<Entity, int> first;
        for (const auto& paper : corpus.papers()) {
            for (const auto& section : paper.sections) {
                for (const auto& sentence : section.sentences) {
                    for (const auto& mention : sentence) {
                        auto [it, inserted] = first.try_emplace(mention.entity(), paper.year);
                        if (!inserted && paper.year < it->second) {
                            it->second = paper.year;
                        }
                    }
                }
            }
        }
        for (const auto& [entity, year] : first) {
            firstYears[entity.type].push_back(year);
        }
        for (auto& [type, years] : firstYears) {
            std::sort(years.begin(), years.end());
        }
    }

    std::map<int, std::set<std::string>> tasksPerYear;
    for (const auto& paper : corpus.papers()) {
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                for (const auto& mention : sentence) {
                    if (mention.type == EntityType::Task) {
                        tasksPerYear[paper.year].insert(mention.surface);
                    }
                }
            }
        }
    }

    DesignMatrix design;
    design.regressors = types;
    design.columns.assign(types.size(), {});
    for (int t = startYear; t <= endYear; ++t) {
        design.years.push_back(t);
        auto taskIt = tasksPerYear.find(t);
        design.target.push_back(taskIt == tasksPerYear.end() ? 0.0 : static_cast<double>(taskIt->second.size()));
        for (std::size_t j = 0; j < types.size(); ++j) {
            const auto& years = firstYears[types[j]];
            auto upTo = std::upper_bound(years.begin(), years.end(), t - 1);
            design.columns[j].push_back(static_cast<double>(upTo - years.begin()));
        }
    }
    return design;
}

RegressionFit fitMlr(const DesignMatrix& design) {
    if (design.columns.size() != design.regressors.size()) {
        throw DomainError("design matrix has mismatched column metadata");
    }
    std::vector<std::string> names;
    names.reserve(design.regressors.size());
    for (EntityType type : design.regressors) {
        names.push_back(toString(type));
    }
    return fitOls(design.columns, design.target, names);
}

}  // namespace scitrend
