#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "Support/Generators.h"
#include "Support/Oracles.h"
#include "scitrend/Corpus.h"
#include "scitrend/Errors.h"
#include "scitrend/Random.h"
#include "scitrend/Regression.h"

using namespace scitrend;

namespace {

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
    double meanA = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    double meanB = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - meanA) * (b[i] - meanB);
    }
    return cov / static_cast<double>(a.size());
}

PaperRecord taskPaper(std::string id, int year, const std::vector<std::string>& tasks) {
    Section section;
    section.name = "title";
    Sentence sentence;
    for (const auto& t : tasks) {
        sentence.push_back(Mention{t, EntityType::Task});
    }
    section.sentences.push_back(sentence);
    PaperRecord paper;
    paper.id = std::move(id);
    paper.year = year;
    paper.sections.push_back(std::move(section));
    return paper;
}

}  // namespace

TEST_CASE("fitOls recovers a noiseless line exactly") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(3.0 + 2.0 * i);
    }
    RegressionFit fit = fitOls({x}, y);
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-9));
    REQUIRE(fit.coefficients.size() == 1);
    CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.rSquared == doctest::Approx(1.0).epsilon(1e-9));
    for (double r : fit.residuals) {
        CHECK(std::fabs(r) < 1e-9);
    }
    CHECK(fit.samples == 10);
}

TEST_CASE("fitOls recovers planted coefficients under small noise") {
    std::mt19937_64 rng(301);
    const std::size_t n = 200;
    std::vector<double> x1(n), x2(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = nextUniform(rng) * 4.0 - 2.0;
        x2[i] = nextUniform(rng) * 4.0 - 2.0;
        y[i] = 1.0 + 2.0 * x1[i] - x2[i] + 0.01 * nextGaussian(rng);
    }
    RegressionFit fit = fitOls({x1, x2}, y);
    CHECK(std::fabs(fit.intercept - 1.0) < 0.02);
    CHECK(std::fabs(fit.coefficients[0] - 2.0) < 0.02);
    CHECK(std::fabs(fit.coefficients[1] + 1.0) < 0.02);
    CHECK(fit.rSquared > 0.99);
    CHECK(fit.pValues[0] < 1e-6);
    CHECK(fit.pValues[1] < 1e-6);
}

TEST_CASE("fitOls names collinear columns") {
    std::vector<double> x = {1, 2, 3, 4, 5, 6};
    std::vector<double> y = {2, 4, 6, 8, 10, 12};
    try {
        (void)fitOls({x, x}, y, {"alpha", "beta"});
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        std::string what = e.what();
        CHECK(what.find("rank deficient") != std::string::npos);
        bool named = what.find("alpha") != std::string::npos || what.find("beta") != std::string::npos;
        CHECK(named);
    }
}

TEST_CASE("fitOls rejects more columns than rows") {
    CHECK_THROWS_AS((void)fitOls({{1, 2}, {3, 4}}, {1, 2}), DomainError);
}

TEST_CASE("fitOls residuals are orthogonal to every regressor") {
    std::mt19937_64 rng(302);
    const std::size_t n = 100;
    std::vector<std::vector<double>> columns(5, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& column : columns) {
            column[i] = nextGaussian(rng);
        }
        y[i] = 0.3 + columns[0][i] - 2.0 * columns[3][i] + nextGaussian(rng);
    }
    RegressionFit fit = fitOls(columns, y);
    for (const auto& column : columns) {
        double scale = std::sqrt(covariance(column, column) * covariance(y, y));
        CHECK(std::fabs(covariance(fit.residuals, column)) < 1e-8 * std::max(scale, 1.0));
    }
}

TEST_CASE("adding a regressor never decreases R squared") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 40;
        std::vector<std::vector<double>> columns(4, std::vector<double>(n));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& column : columns) {
                column[i] = nextGaussian(rng);
            }
            y[i] = columns[0][i] + 0.5 * columns[1][i] + nextGaussian(rng);
        }
        double previous = -1.0;
        for (std::size_t k = 1; k <= columns.size(); ++k) {
            std::vector<std::vector<double>> subset(columns.begin(), columns.begin() + k);
            RegressionFit fit = fitOls(subset, y);
            CHECK(fit.rSquared >= previous - 1e-12);
            previous = fit.rSquared;
        }
    }
}

TEST_CASE("fitOls is invariant to row order") {
    std::mt19937_64 rng(304);
    const std::size_t n = 60;
    std::vector<std::vector<double>> columns(3, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& column : columns) {
            column[i] = nextGaussian(rng);
        }
        y[i] = 1.0 - columns[1][i] + 0.25 * nextGaussian(rng);
    }
    RegressionFit base = fitOls(columns, y);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(perm[i - 1], perm[testgen::pickIndex(rng, i)]);
    }
    std::vector<std::vector<double>> shuffled(3, std::vector<double>(n));
    std::vector<double> yShuffled(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            shuffled[j][i] = columns[j][perm[i]];
        }
        yShuffled[i] = y[perm[i]];
    }
    RegressionFit permuted = fitOls(shuffled, yShuffled);
    CHECK(permuted.intercept == doctest::Approx(base.intercept).epsilon(1e-9));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(permuted.coefficients[j] == doctest::Approx(base.coefficients[j]).epsilon(1e-9));
    }
    CHECK(permuted.rSquared == doctest::Approx(base.rSquared).epsilon(1e-12));
}

TEST_CASE("predictions reproduce the reported R squared") {
    std::mt19937_64 rng(305);
    const std::size_t n = 80;
    std::vector<std::vector<double>> columns(2, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        columns[0][i] = nextGaussian(rng);
        columns[1][i] = nextGaussian(rng);
        y[i] = 2.0 + columns[0][i] + nextGaussian(rng);
    }
    RegressionFit fit = fitOls(columns, y);
    std::vector<double> predicted = fit.predictions(columns);
    double meanY = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double ssRes = 0.0, ssTot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ssRes += (y[i] - predicted[i]) * (y[i] - predicted[i]);
        ssTot += (y[i] - meanY) * (y[i] - meanY);
    }
    CHECK(1.0 - ssRes / ssTot == doctest::Approx(fit.rSquared).epsilon(1e-12));
}

TEST_CASE("fitOls agrees with normal-equation coefficients") {
    std::mt19937_64 rng(306);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 50;
        std::size_t k = 1 + testgen::pickIndex(rng, 3);
        std::vector<std::vector<double>> columns(k, std::vector<double>(n));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& column : columns) {
                column[i] = nextGaussian(rng);
            }
            y[i] = nextGaussian(rng);
        }
        RegressionFit fit = fitOls(columns, y);
        std::vector<double> reference = oracle::olsNormalEquations(columns, y);
        REQUIRE(reference.size() == k + 1);
        CHECK(fit.intercept == doctest::Approx(reference[0]).epsilon(1e-8));
        for (std::size_t j = 0; j < k; ++j) {
            CHECK(fit.coefficients[j] == doctest::Approx(reference[j + 1]).epsilon(1e-8));
        }
    }
}

TEST_CASE("twoSidedTPValue behaves like a p-value") {
    CHECK(twoSidedTPValue(0.0, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(twoSidedTPValue(50.0, 10.0) < 1e-8);
    CHECK(twoSidedTPValue(2.0, 8.0) == doctest::Approx(twoSidedTPValue(-2.0, 8.0)).epsilon(1e-12));
    CHECK(twoSidedTPValue(1.0, 8.0) > twoSidedTPValue(2.0, 8.0));
    // Classical two-sided value for t=2.0, df=10.
    CHECK(twoSidedTPValue(2.0, 10.0) == doctest::Approx(0.0733880348).epsilon(1e-7));
}

TEST_CASE("buildTrendDesign counts distinct entities cumulatively") {
    // task "a" first appears 1995; method "m" in 1994; task "b" in 1996.
    std::vector<PaperRecord> papers;
    papers.push_back(taskPaper("p0", 1994, {}));
    {
        Section s;
        s.name = "title";
        s.sentences.push_back(Sentence{Mention{"m", EntityType::Method}});
        papers.back().sections[0] = s;
    }
    papers.push_back(taskPaper("p1", 1995, {"a"}));
    papers.push_back(taskPaper("p2", 1996, {"a", "b"}));
    papers.push_back(taskPaper("p3", 1997, {"b"}));
    papers.push_back(taskPaper("p4", 1998, {"a"}));
    papers.push_back(taskPaper("p5", 1999, {"a"}));
    Corpus corpus(papers);

    DesignMatrix design = buildTrendDesign(corpus, 1994, 1999, {EntityType::Task});
    REQUIRE(design.years == std::vector<int>{1994, 1995, 1996, 1997, 1998, 1999});
    REQUIRE(design.columns.size() == 1);
    // Cumulative distinct tasks over all years <= t-1.
    CHECK(design.columns[0] == std::vector<double>{0, 0, 1, 2, 2, 2});
    // Distinct task entities mentioned in year t.
    CHECK(design.target == std::vector<double>{0, 1, 2, 1, 1, 1});
}

TEST_CASE("buildTrendDesign shapes follow the requested types") {
    std::mt19937_64 rng(307);
    testgen::CorpusShape shape;
    shape.years = 10;
    Corpus corpus = testgen::randomCorpus(rng, shape);
    DesignMatrix design = buildTrendDesign(corpus, shape.startYear, shape.startYear + 9);
    CHECK(design.years.size() == 10);
    CHECK(design.columns.size() == 4);
    for (const auto& column : design.columns) {
        REQUIRE(column.size() == 10);
        for (std::size_t r = 1; r < column.size(); ++r) {
            CHECK(column[r] >= column[r - 1]);  // cumulative counts are monotone
        }
    }
    CHECK(design.target.size() == 10);
}

TEST_CASE("buildTrendDesign rejects too-short ranges") {
    std::mt19937_64 rng(308);
    Corpus corpus = testgen::randomCorpus(rng);
    CHECK_THROWS_AS((void)buildTrendDesign(corpus, 2000, 2002), DomainError);
    CHECK_THROWS_AS((void)buildTrendDesign(corpus, 2002, 2000), DomainError);
}

TEST_CASE("fitMlr fits the trend design like fitOls") {
    // Staggered first appearances keep the cumulative columns independent.
    std::vector<PaperRecord> papers;
    int id = 0;
    for (int year = 2000; year < 2012; ++year) {
        std::vector<std::string> tasks = {"t0"};
        if (year - 2000 < 6) {
            tasks.push_back("t" + std::to_string(year - 2000));
        }
        papers.push_back(taskPaper("p" + std::to_string(id++), year, tasks));
        if ((year - 2000) % 3 == 0) {
            Section s;
            s.name = "title";
            s.sentences.push_back(Sentence{Mention{"m" + std::to_string(year), EntityType::Method}});
            papers.push_back(PaperRecord{"p" + std::to_string(id++), year, {s}});
        }
    }
    Corpus corpus(papers);
    DesignMatrix design = buildTrendDesign(corpus, 2000, 2011, {EntityType::Task, EntityType::Method});
    RegressionFit viaMlr = fitMlr(design);
    RegressionFit viaOls = fitOls(design.columns, design.target, {"task", "method"});
    CHECK(viaMlr.intercept == viaOls.intercept);
    CHECK(viaMlr.coefficients == viaOls.coefficients);
    CHECK(viaMlr.rSquared == viaOls.rSquared);
}
