#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scitrend/Corpus.h"

namespace scitrend {

// Yearly trend design: target[r] is the number of distinct task entities in
// years[r]; columns[j][r] is the cumulative distinct-entity count of type
// regressors[j] over all years strictly before years[r].
struct DesignMatrix {
    std::vector<int> years;
    std::vector<EntityType> regressors;
    std::vector<std::vector<double>> columns;
    std::vector<double> target;
};

struct RegressionFit {
    double intercept = 0.0;
    double interceptStdError = 0.0;
    double interceptPValue = 1.0;
    std::vector<double> coefficients;
    std::vector<double> standardErrors;
    std::vector<double> pValues;  // two-sided t-tests, df = n - k - 1
    double rSquared = 0.0;
    std::vector<double> residuals;
    std::size_t samples = 0;

    std::vector<double> predictions(const std::vector<std::vector<double>>& columns) const;
};

DesignMatrix buildTrendDesign(const Corpus& corpus, int startYear, int endYear,
                              const std::vector<EntityType>& types = {kEntityTypes.begin(), kEntityTypes.end()});

RegressionFit fitMlr(const DesignMatrix& design);

// Ordinary least squares of target on the given columns plus an intercept,
// via a column-pivoted QR with relative rank tolerance 1e-10. Rank
// deficiency raises DomainError naming the collinear columns. Used by the
// trend fit, the connection-strength estimation, and the density model.
RegressionFit fitOls(const std::vector<std::vector<double>>& columns, const std::vector<double>& target,
                     const std::vector<std::string>& names = {});

double twoSidedTPValue(double tStatistic, double degreesOfFreedom);

}  // namespace scitrend
