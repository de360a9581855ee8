#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include <json.hpp>

#include "scitrend/Causal.h"
#include "scitrend/Errors.h"
#include "scitrend/Synthetic.h"
#include "scitrend/Variables.h"

using namespace scitrend;

TEST_CASE("generateSem draws from the declared linear model") {
    SemSpec spec;
    spec.variables = 3;
    spec.edges = {{0, 1, 2.0}, {1, 2, -1.5}};
    SemSample sample = generateSem(spec, 5000, 31);

    REQUIRE(sample.columns.size() == 3);
    for (const auto& column : sample.columns) {
        CHECK(column.size() == 5000);
    }
    CHECK(sample.generatingOrder == std::vector<std::size_t>{0, 1, 2});
    CHECK(sample.strengths[1][0] == 2.0);
    CHECK(sample.strengths[2][1] == -1.5);
    CHECK(sample.strengths[0][1] == 0.0);

    // The chain is recoverable from its own draws.
    CausalGraph graph = directLingam(sample.columns, sample.names);
    CHECK(graph.order == sample.generatingOrder);
    CHECK(graph.strengths[1][0] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(graph.strengths[2][1] == doctest::Approx(-1.5).epsilon(0.05));
}

TEST_CASE("generateSem rejects cyclic specifications") {
    SemSpec spec;
    spec.variables = 2;
    spec.edges = {{0, 1, 1.0}, {1, 0, 1.0}};
    CHECK_THROWS_WITH_AS((void)generateSem(spec, 100, 1), doctest::Contains("cycl"), DomainError);
}

TEST_CASE("generateSem is deterministic and noise-family aware") {
    SemSpec spec;
    spec.variables = 2;
    spec.edges = {{0, 1, 0.8}};
    SemSample a = generateSem(spec, 500, 7);
    SemSample b = generateSem(spec, 500, 7);
    CHECK(a.columns == b.columns);

    spec.noise = NoiseFamily::Laplace;
    SemSample laplace = generateSem(spec, 500, 7);
    CHECK(laplace.columns != a.columns);
    CHECK(toString(NoiseFamily::Uniform) == "uniform");
    CHECK(toString(NoiseFamily::Laplace) == "laplace");
}

TEST_CASE("generateSem honors per-variable noise scales") {
    SemSpec spec;
    spec.variables = 2;
    spec.noiseScale = {1.0, 3.0};
    SemSample sample = generateSem(spec, 20000, 13);
    auto variance = [](const std::vector<double>& column) {
        double mean = 0.0;
        for (double v : column) mean += v;
        mean /= static_cast<double>(column.size());
        double var = 0.0;
        for (double v : column) var += (v - mean) * (v - mean);
        return var / static_cast<double>(column.size());
    };
    CHECK(variance(sample.columns[0]) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(variance(sample.columns[1]) == doctest::Approx(9.0).epsilon(0.05));
}

TEST_CASE("synthetic corpus plants an exact boundary change value") {
    SyntheticCorpus synthetic = generateSyntheticCorpus({}, 42);
    const auto& truth = synthetic.truth;
    CHECK(truth.boundaryDelta == doctest::Approx(0.4).epsilon(1e-12));
    double measured = entityChange(synthetic.corpus, truth.driver, truth.targetTask, truth.firstYear,
                                   truth.lastYear);
    CHECK(measured == doctest::Approx(0.4).epsilon(1e-12));
    CHECK((truth.driver.type == EntityType::Method));
    CHECK((truth.targetTask.type == EntityType::Task));
}

TEST_CASE("synthetic corpus is deterministic per seed") {
    SyntheticCorpus a = generateSyntheticCorpus({}, 9);
    SyntheticCorpus b = generateSyntheticCorpus({}, 9);
    CHECK(a.corpus.papers() == b.corpus.papers());
    SyntheticCorpus c = generateSyntheticCorpus({}, 10);
    CHECK(a.corpus.papers() != c.corpus.papers());
}

TEST_CASE("synthetic task share rises while the adversary stays constant") {
    SyntheticCorpus synthetic = generateSyntheticCorpus({}, 43);
    const auto& truth = synthetic.truth;
    REQUIRE(truth.taskPapersPerYear.size() ==
            static_cast<std::size_t>(truth.lastYear - truth.firstYear + 1));
    CHECK(truth.taskPapersPerYear.front() < truth.taskPapersPerYear.back());
    CHECK(truth.driverCooccurrences.front() < truth.driverCooccurrences.back());

    REQUIRE(truth.adversary.has_value());
    std::size_t first = cooccurrenceCount(synthetic.corpus, *truth.adversary, truth.targetTask,
                                          truth.firstYear);
    CHECK(first > 0);
    for (int year = truth.firstYear; year <= truth.lastYear; ++year) {
        CHECK(cooccurrenceCount(synthetic.corpus, *truth.adversary, truth.targetTask, year) == first);
    }
}

TEST_CASE("synthetic corpus respects spec knobs") {
    SyntheticCorpusSpec spec;
    spec.startYear = 1990;
    spec.years = 8;
    spec.papersPerYear = 6;
    spec.otherTasks = 2;
    spec.adversary = false;
    SyntheticCorpus synthetic = generateSyntheticCorpus(spec, 5);
    CHECK(!synthetic.truth.adversary.has_value());
    CHECK(synthetic.truth.firstYear == 1990);
    CHECK(synthetic.truth.lastYear == 1997);
    CHECK(synthetic.corpus.minYear() == 1990);
    CHECK(synthetic.corpus.maxYear() == 1997);
    for (int year = 1990; year <= 1997; ++year) {
        CHECK(synthetic.corpus.paperCount(year) >= spec.papersPerYear);
    }
}

TEST_CASE("ground truth JSON records the planted structure") {
    SemSpec spec;
    spec.variables = 2;
    spec.edges = {{0, 1, 1.1}};
    SemSample sample = generateSem(spec, 200, 3);
    SyntheticCorpus synthetic = generateSyntheticCorpus({}, 44);

    std::ostringstream out;
    writeGroundTruthJson(synthetic, &spec, &sample, out);
    auto doc = nlohmann::json::parse(out.str());
    const auto& corpus = doc.at("corpus");
    CHECK(corpus.at("target_task").at("canonical") == synthetic.truth.targetTask.canonical);
    CHECK(corpus.at("driver").at("canonical") == synthetic.truth.driver.canonical);
    CHECK(corpus.at("boundary_delta").get<double>() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(!corpus.at("adversary").is_null());
    CHECK(doc.at("sem").at("names").size() == 2);
    CHECK(doc.at("sem").at("edges").size() == 1);
}

TEST_CASE("writeMatrixCsv renders one row per sample") {
    std::ostringstream out;
    writeMatrixCsv({"a", "b"}, {{1.0, 2.0}, {3.0, 4.0}}, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    std::getline(in, line);
    CHECK(line == "1,3");
    std::getline(in, line);
    CHECK(line == "2,4");
    CHECK(!std::getline(in, line));
}
