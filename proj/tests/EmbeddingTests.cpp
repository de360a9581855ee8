#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "Support/Generators.h"
#include "Support/Oracles.h"
#include "scitrend/Embeddings.h"
#include "scitrend/Errors.h"

using namespace scitrend;

namespace {

PaperRecord mentionPaper(std::string id, int year, const std::vector<Entity>& mentions) {
    Section section;
    section.name = "body";
    Sentence sentence;
    for (const auto& e : mentions) {
        sentence.push_back(Mention{e.canonical, e.type});
    }
    section.sentences.push_back(std::move(sentence));
    PaperRecord paper;
    paper.id = std::move(id);
    paper.year = year;
    paper.sections.push_back(std::move(section));
    return paper;
}

double cosine(const EmbeddingSpace& space, const Entity& a, const Entity& b) {
    const auto& va = space.vectors().at(a);
    const auto& vb = space.vectors().at(b);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    return dot / std::sqrt(na * nb);
}

const Entity kA{"a", EntityType::Task};
const Entity kB{"b", EntityType::Method};
const Entity kC{"c", EntityType::Dataset};
const Entity kD{"d", EntityType::Metric};

}  // namespace

TEST_CASE("buildEntitySequences preserves mention order") {
    std::vector<PaperRecord> papers;
    PaperRecord paper;
    paper.id = "p1";
    paper.year = 2000;
    Section first;
    first.name = "title";
    first.sentences.push_back(Sentence{Mention{"a", EntityType::Task}, Mention{"b", EntityType::Method}});
    Section second;
    second.name = "abstract";
    second.sentences.push_back(Sentence{Mention{"a", EntityType::Task}});
    paper.sections = {first, second};
    papers.push_back(paper);
    Corpus corpus(papers);

    auto sequences = buildEntitySequences(corpus, Period{"y", 2000, 2000});
    REQUIRE(sequences.size() == 1);
    CHECK(sequences[0].paperId == "p1");
    CHECK(sequences[0].entities == std::vector<Entity>{kA, kB, kA});
}

TEST_CASE("buildEntitySequences drops single-mention papers") {
    std::vector<PaperRecord> papers;
    papers.push_back(mentionPaper("p1", 2000, {kA, kB}));
    papers.push_back(mentionPaper("p2", 2000, {kC}));
    papers.push_back(mentionPaper("p3", 2000, {kA, kC}));
    Corpus corpus(papers);
    auto sequences = buildEntitySequences(corpus, Period{"y", 2000, 2000});
    CHECK(sequences.size() == 2);
}

TEST_CASE("buildEntitySequences rejects an empty slice") {
    Corpus corpus({mentionPaper("p1", 2000, {kA, kB})});
    CHECK_THROWS_WITH_AS((void)buildEntitySequences(corpus, Period{"y", 2005, 2006}),
                         doctest::Contains("empty slice"), DomainError);
}

TEST_CASE("trainSgns is bit-deterministic for a fixed seed") {
    std::mt19937_64 rng(401);
    Corpus corpus = testgen::randomCorpus(rng);
    auto sequences = buildEntitySequences(corpus, Period{"all", 2000, 2002});
    SgnsConfig config;
    config.dim = 8;
    config.epochs = 2;
    config.seed = 99;
    EmbeddingSpace first = trainSgns(sequences, config);
    EmbeddingSpace second = trainSgns(sequences, config);
    REQUIRE(first.size() == second.size());
    CHECK(first.vectors() == second.vectors());  // exact bit equality
}

TEST_CASE("trainSgns produces vectors of the configured dimension") {
    std::mt19937_64 rng(402);
    Corpus corpus = testgen::randomCorpus(rng);
    auto sequences = buildEntitySequences(corpus, Period{"all", 2000, 2002});
    SgnsConfig config;
    config.dim = 16;
    config.epochs = 1;
    config.seed = 3;
    EmbeddingSpace space = trainSgns(sequences, config);
    CHECK(space.dim() == 16);
    for (const auto& [entity, vector] : space.vectors()) {
        (void)entity;
        CHECK(vector.size() == 16);
        for (double v : vector) {
            CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("co-occurring entities end up closer than never co-occurring ones") {
    // a and b share every document; c and d share every document; the two
    // groups never mix.
    std::vector<EntitySequence> sequences;
    for (int i = 0; i < 60; ++i) {
        sequences.push_back({"ab" + std::to_string(i), {kA, kB, kA, kB}});
        sequences.push_back({"cd" + std::to_string(i), {kC, kD, kC, kD}});
    }
    SgnsConfig config;
    config.dim = 12;
    config.epochs = 5;
    config.seed = 7;
    EmbeddingSpace space = trainSgns(sequences, config);
    CHECK(cosine(space, kA, kB) > cosine(space, kA, kC));
}

TEST_CASE("trainSgns truncates oversized documents and reports it") {
    std::vector<EntitySequence> sequences;
    sequences.push_back({"big", {kA, kB, kC, kD, kA, kB}});
    sequences.push_back({"small", {kA, kB}});
    SgnsConfig config;
    config.dim = 4;
    config.epochs = 1;
    config.seed = 1;
    config.maxDocMentions = 3;
    EmbeddingSpace space = trainSgns(sequences, config);
    CHECK(space.truncatedDocs() == 1);
}

TEST_CASE("nearestNeighbors ranks by cosine similarity") {
    std::map<Entity, std::vector<double>> vectors;
    vectors[kA] = {1.0, 0.0};
    vectors[kB] = {0.9, 0.1};   // closest to a
    vectors[kC] = {0.0, 1.0};   // orthogonal to a
    EmbeddingSpace space = EmbeddingSpace::fromVectors(vectors);

    auto neighbors = nearestNeighbors(space, kA, 2);
    REQUIRE(neighbors.size() == 2);
    CHECK(neighbors[0] == kB);
    CHECK(neighbors[1] == kC);

    auto single = nearestNeighbors(space, kA, 1);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == kB);
}

TEST_CASE("nearestNeighbors rejects entities outside the space") {
    std::map<Entity, std::vector<double>> vectors;
    vectors[kA] = {1.0, 0.0};
    vectors[kB] = {0.0, 1.0};
    EmbeddingSpace space = EmbeddingSpace::fromVectors(vectors);
    CHECK_THROWS_AS((void)nearestNeighbors(space, kC, 1), DomainError);
    CHECK_THROWS_AS((void)nearestNeighbors(space, kA, 2), DomainError);  // l must leave room
}

TEST_CASE("nearestNeighbors breaks exact cosine ties lexicographically") {
    std::map<Entity, std::vector<double>> vectors;
    vectors[kA] = {1.0, 0.0};
    Entity tie1{"m one", EntityType::Method};
    Entity tie2{"m two", EntityType::Method};
    vectors[tie2] = {2.0, 0.0};  // same direction, different norm
    vectors[tie1] = {3.0, 0.0};
    EmbeddingSpace space = EmbeddingSpace::fromVectors(vectors);
    auto neighbors = nearestNeighbors(space, kA, 2);
    CHECK(neighbors == std::vector<Entity>{tie1, tie2});
}

TEST_CASE("nearestNeighbors excludes the query and matches the oracle") {
    std::mt19937_64 rng(403);
    testgen::CorpusShape shape;
    auto pool = testgen::entityPool(shape);
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingSpace space = testgen::randomSpace(rng, pool, 6);
        const Entity& query = pool[testgen::pickIndex(rng, pool.size())];
        std::size_t l = 1 + testgen::pickIndex(rng, 5);
        auto neighbors = nearestNeighbors(space, query, l);
        CHECK(neighbors.size() == l);
        for (const auto& n : neighbors) {
            CHECK(n != query);
        }
        CHECK(neighbors == oracle::nearestNeighbors(space, query, l));
    }
}

TEST_CASE("nearestNeighbors is invariant to uniform positive scaling") {
    std::mt19937_64 rng(404);
    auto pool = testgen::entityPool({});
    EmbeddingSpace space = testgen::randomSpace(rng, pool, 5);
    std::map<Entity, std::vector<double>> scaled;
    for (const auto& [entity, vector] : space.vectors()) {
        std::vector<double> copy = vector;
        for (double& v : copy) {
            v *= 17.5;
        }
        scaled[entity] = copy;
    }
    EmbeddingSpace scaledSpace = EmbeddingSpace::fromVectors(scaled);
    for (const auto& entity : pool) {
        CHECK(nearestNeighbors(space, entity, 4) == nearestNeighbors(scaledSpace, entity, 4));
    }
}

TEST_CASE("save and load round-trip an embedding space exactly") {
    std::mt19937_64 rng(405);
    Corpus corpus = testgen::randomCorpus(rng);
    auto sequences = buildEntitySequences(corpus, Period{"all", 2000, 2002});
    SgnsConfig config;
    config.dim = 6;
    config.epochs = 1;
    config.seed = 42;
    EmbeddingSpace space = trainSgns(sequences, config, Period{"all", 2000, 2002});

    std::ostringstream out;
    space.save(out);
    std::istringstream in(out.str());
    EmbeddingSpace loaded = EmbeddingSpace::load(in);

    CHECK(loaded.dim() == space.dim());
    CHECK(loaded.vectors() == space.vectors());
    CHECK(loaded.slice() == space.slice());
    CHECK(loaded.seed() == space.seed());
    CHECK(loaded.truncatedDocs() == space.truncatedDocs());
}
