#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scitrend/Causal.h"
#include "scitrend/Corpus.h"
#include "scitrend/Embeddings.h"
#include "scitrend/Random.h"
#include "scitrend/Synthetic.h"
#include "scitrend/Variables.h"

using namespace scitrend;

namespace {

const Corpus& corpusFixture() {
    static const Corpus corpus = generateSyntheticCorpus({}, 7).corpus;
    return corpus;
}

const std::string& corpusText() {
    static const std::string text = [] {
        std::ostringstream out;
        serializeCorpus(corpusFixture(), out);
        return out.str();
    }();
    return text;
}

}  // namespace

static void parseJsonlCorpus(benchmark::State& state) {
    for (auto _ : state) {
        std::istringstream in(corpusText());
        Corpus corpus = parseCorpus(in);
        benchmark::DoNotOptimize(corpus.size());
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * corpusText().size()));
}
BENCHMARK(parseJsonlCorpus);

static void trainYearEmbedding(benchmark::State& state) {
    Period slice{"2010", 2010, 2010};
    auto sequences = buildEntitySequences(corpusFixture(), slice);
    SgnsConfig config;
    config.dim = static_cast<int>(state.range(0));
    config.epochs = 2;
    for (auto _ : state) {
        EmbeddingSpace space = trainSgns(sequences, config, slice);
        benchmark::DoNotOptimize(space.size());
    }
}
BENCHMARK(trainYearEmbedding)->Arg(32)->Arg(100);

static void assembleVariableSamples(benchmark::State& state) {
    const Corpus& corpus = corpusFixture();
    std::vector<Entity> tasks = {{"focal task", EntityType::Task}};
    std::vector<std::pair<int, int>> yearPairs;
    for (int year = 2000; year < 2019; ++year) {
        yearPairs.emplace_back(year, year + 1);
    }
    SpacesByYear spaces;  // frequency and change only; embeddings benchmarked above
    for (auto _ : state) {
        auto samples = assembleSamples(corpus, tasks, yearPairs, spaces, {});
        benchmark::DoNotOptimize(samples.size());
    }
}
BENCHMARK(assembleVariableSamples);

static void discoverStructure(benchmark::State& state) {
    SemSpec spec;
    spec.variables = static_cast<std::size_t>(state.range(0));
    for (std::size_t i = 0; i + 1 < spec.variables; ++i) {
        spec.edges.push_back({i, i + 1, 0.8});
    }
    SemSample sample = generateSem(spec, 2000, 19);
    for (auto _ : state) {
        CausalGraph graph = directLingam(sample.columns, sample.names, {});
        benchmark::DoNotOptimize(graph.edgeCount());
    }
}
BENCHMARK(discoverStructure)->Arg(3)->Arg(6);

static void estimateDoseResponse(benchmark::State& state) {
    const std::size_t n = 2000;
    std::mt19937_64 rng(23);
    std::vector<double> treatment(n);
    std::vector<double> outcome(n);
    for (std::size_t i = 0; i < n; ++i) {
        treatment[i] = nextUniform(rng);
        outcome[i] = 2.0 * treatment[i] + 0.1 * nextGaussian(rng);
    }
    for (auto _ : state) {
        TreatmentDensity density = estimateTreatmentDensity(treatment);
        EffectEstimate effect = splineEffect(treatment, outcome, density.sampleDensities);
        benchmark::DoNotOptimize(effect.scalarEffect);
    }
}
BENCHMARK(estimateDoseResponse);

BENCHMARK_MAIN();
