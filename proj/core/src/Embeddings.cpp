#include "scitrend/Embeddings.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "scitrend/Errors.h"
#include "scitrend/Random.h"

namespace scitrend {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;
constexpr double kMinLearningRateFactor = 1e-4;

double sigmoid(double x) {
    x = std::clamp(x, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-x));
}

struct TrainState {
    std::vector<Entity> vocab;
    std::vector<std::vector<std::size_t>> docs;  // sequences as vocab indices
    std::vector<double> noiseCdf;
    std::vector<double> input;    // vocab x dim, the vectors we keep
    std::vector<double> context;  // vocab x dim
};

std::size_t sampleNoise(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
        return cdf.size() - 1;
    }
    return static_cast<std::size_t>(it - cdf.begin());
}

// One SGD pass over a batch of documents. `processed` / `total` drive the
// linear learning-rate decay; callers pass thread-local counters in
// multi-threaded mode.
void trainDocs(TrainState& state, const std::vector<std::size_t>& docIds, const SgnsConfig& config,
               std::mt19937_64& rng, std::size_t& processed, std::size_t total) {
    const int dim = config.dim;
    std::vector<double> gradient(dim);
    for (std::size_t docId : docIds) {
        const auto& doc = state.docs[docId];
        for (std::size_t a = 0; a < doc.size(); ++a) {
            for (std::size_t b = 0; b < doc.size(); ++b) {
                if (a == b) {
                    continue;
                }
                double progress = static_cast<double>(processed) / static_cast<double>(total);
                double alpha = config.learningRate * std::max(1.0 - progress, kMinLearningRateFactor);
                ++processed;

                double* center = state.input.data() + doc[a] * dim;
                std::fill(gradient.begin(), gradient.end(), 0.0);
                for (int k = 0; k <= config.negatives; ++k) {
                    std::size_t target;
                    double label;
                    if (k == 0) {
                        target = doc[b];
                        label = 1.0;
                    } else {
                        target = sampleNoise(state.noiseCdf, nextUniform(rng));
                        if (target == doc[b]) {
                            continue;
                        }
                        label = 0.0;
                    }
                    double* ctx = state.context.data() + target * dim;
                    double dot = 0.0;
                    for (int d = 0; d < dim; ++d) {
                        dot += center[d] * ctx[d];
                    }
                    if (!std::isfinite(dot)) {
                        throw DomainError("non-finite value during training; lower the learning rate");
                    }
                    double g = (label - sigmoid(dot)) * alpha;
                    for (int d = 0; d < dim; ++d) {
                        gradient[d] += g * ctx[d];
                        ctx[d] += g * center[d];
                    }
                }
                for (int d = 0; d < dim; ++d) {
                    center[d] += gradient[d];
                }
            }
        }
    }
}

}  // namespace

EmbeddingSpace EmbeddingSpace::fromVectors(std::map<Entity, std::vector<double>> vectors, Period slice,
                                           std::uint64_t seed) {
    EmbeddingSpace space;
    space.slice_ = std::move(slice);
    space.config_.seed = seed;
    for (const auto& [entity, values] : vectors) {
        if (space.dim_ == 0) {
            space.dim_ = static_cast<int>(values.size());
        }
        if (static_cast<int>(values.size()) != space.dim_) {
            throw DomainError("embedding vectors must share one dimension");
        }
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw DomainError("embedding vector for \"" + entity.canonical + "\" has non-finite values");
            }
        }
    }
    space.config_.dim = space.dim_;
    space.vectors_ = std::move(vectors);
    return space;
}

std::vector<EntitySequence> buildEntitySequences(const Corpus& corpus, const Period& slice) {
    std::size_t inSlice = 0;
    std::vector<EntitySequence> sequences;
    for (const auto& paper : corpus.papers()) {
        if (!slice.contains(paper.year)) {
            continue;
        }
        ++inSlice;
        EntitySequence sequence;
        sequence.paperId = paper.id;
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                for (const auto& mention : sentence) {
                    sequence.entities.push_back(mention.entity());
                }
            }
        }
        if (sequence.entities.size() >= 2) {
            sequences.push_back(std::move(sequence));
        }
    }
    if (inSlice == 0) {
        throw DomainError("empty slice: no papers in " + std::to_string(slice.start) + "-" +
                          std::to_string(slice.end));
    }
    return sequences;
}

EmbeddingSpace trainSgns(const std::vector<EntitySequence>& sequences, const SgnsConfig& config,
                         const Period& slice) {
    if (config.dim < 2) {
        throw ConfigError("embedding dim must be at least 2");
    }
    if (config.negatives < 1) {
        throw ConfigError("negative sample count must be at least 1");
    }
    if (config.epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (!(config.learningRate > 0.0) || !std::isfinite(config.learningRate)) {
        throw ConfigError("learning rate must be positive and finite");
    }
    if (config.maxDocMentions < 2) {
        throw ConfigError("document mention cap must be at least 2");
    }
    if (config.threads < 1) {
        throw ConfigError("thread count must be at least 1");
    }
    if (sequences.empty()) {
        throw DomainError("training requires at least one entity sequence");
    }

    EmbeddingSpace space;
    space.slice_ = slice;
    space.config_ = config;
    space.dim_ = config.dim;

    TrainState state;
    {
        std::map<Entity, std::size_t> index;
        std::vector<std::vector<Entity>> truncated;
        for (const auto& sequence : sequences) {
            if (sequence.entities.size() < 2) {
                continue;
            }
            auto entities = sequence.entities;
            if (entities.size() > config.maxDocMentions) {
                entities.resize(config.maxDocMentions);
                ++space.truncatedDocs_;
            }
            truncated.push_back(std::move(entities));
        }
        for (const auto& doc : truncated) {
            for (const auto& entity : doc) {
                index.emplace(entity, 0);
            }
        }
        std::size_t next = 0;
        for (auto& [entity, slot] : index) {
            slot = next++;
            state.vocab.push_back(entity);
        }
        std::vector<std::size_t> counts(state.vocab.size(), 0);
        for (const auto& doc : truncated) {
            std::vector<std::size_t> ids;
            ids.reserve(doc.size());
            for (const auto& entity : doc) {
                std::size_t id = index[entity];
                ids.push_back(id);
                ++counts[id];
            }
            state.docs.push_back(std::move(ids));
        }
        double totalWeight = 0.0;
        state.noiseCdf.resize(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            totalWeight += std::pow(static_cast<double>(counts[i]), config.unigramPower);
            state.noiseCdf[i] = totalWeight;
        }
        for (double& c : state.noiseCdf) {
            c /= totalWeight;
        }
    }
    if (state.docs.empty()) {
        throw DomainError("training requires at least one sequence with two mentions");
    }

    const std::size_t vocab = state.vocab.size();
    const int dim = config.dim;
    state.input.resize(vocab * dim);
    state.context.assign(vocab * dim, 0.0);
    std::mt19937_64 rng(config.seed);
    for (double& w : state.input) {
        w = (nextUniform(rng) - 0.5) / dim;
    }

    std::size_t pairsPerEpoch = 0;
    for (const auto& doc : state.docs) {
        pairsPerEpoch += doc.size() * (doc.size() - 1);
    }

    if (config.threads == 1) {
        std::vector<std::size_t> all(state.docs.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = i;
        }
        std::size_t processed = 0;
        std::size_t total = pairsPerEpoch * static_cast<std::size_t>(config.epochs);
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            trainDocs(state, all, config, rng, processed, total);
        }
    } else {
        // Hogwild-style shards: lock-free concurrent updates, fast but not
        // reproducible bit for bit.
        std::vector<std::vector<std::size_t>> shards(config.threads);
        for (std::size_t i = 0; i < state.docs.size(); ++i) {
            shards[i % config.threads].push_back(i);
        }
        std::vector<std::thread> workers;
        std::exception_ptr failure;
        for (int t = 0; t < config.threads; ++t) {
            workers.emplace_back([&, t]() {
                try {
                    std::mt19937_64 shardRng(deriveSeed(config.seed, static_cast<std::uint64_t>(t)));
                    std::size_t processed = 0;
                    std::size_t shardPairs = 0;
                    for (std::size_t docId : shards[t]) {
                        shardPairs += state.docs[docId].size() * (state.docs[docId].size() - 1);
                    }
                    std::size_t total = std::max<std::size_t>(1, shardPairs * config.epochs);
                    for (int epoch = 0; epoch < config.epochs; ++epoch) {
                        trainDocs(state, shards[t], config, shardRng, processed, total);
                    }
                } catch (...) {
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& worker : workers) {
            worker.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    for (std::size_t i = 0; i < vocab; ++i) {
        std::vector<double> values(state.input.begin() + i * dim, state.input.begin() + (i + 1) * dim);
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw DomainError("non-finite value during training; lower the learning rate");
            }
        }
        space.vectors_.emplace(state.vocab[i], std::move(values));
    }
    return space;
}

std::vector<Entity> nearestNeighbors(const EmbeddingSpace& space, const Entity& e, std::size_t l) {
    auto it = space.vectors().find(e);
    if (it == space.vectors().end()) {
        throw DomainError("entity not in slice: \"" + e.canonical + "\" (" + toString(e.type) + ")");
    }
    if (l + 1 > space.size()) {
        throw DomainError("requested " + std::to_string(l) + " neighbors from a space of " +
                          std::to_string(space.size()) + " entities");
    }
    const auto& query = it->second;
    double queryNorm = 0.0;
    for (double v : query) {
        queryNorm += v * v;
    }
    queryNorm = std::sqrt(queryNorm);

    std::vector<std::pair<double, const Entity*>> scored;
    scored.reserve(space.size() - 1);
    for (const auto& [entity, values] : space.vectors()) {
        if (entity == e) {
            continue;
        }
        double dot = 0.0;
        double norm = 0.0;
        for (std::size_t d = 0; d < values.size(); ++d) {
            dot += values[d] * query[d];
            norm += values[d] * values[d];
        }
        norm = std::sqrt(norm);
        double cosine = (norm > 0.0 && queryNorm > 0.0) ? dot / (norm * queryNorm) : 0.0;
        scored.emplace_back(cosine, &entity);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return *a.second < *b.second;
    });
    std::vector<Entity> neighbors;
    neighbors.reserve(l);
    for (std::size_t i = 0; i < l; ++i) {
        neighbors.push_back(*scored[i].second);
    }
    return neighbors;
}

void EmbeddingSpace::save(std::ostream& out) const {
    Json doc;
    doc["format"] = "scitrend-embedding";
    doc["version"] = kFormatVersion;
    doc["dim"] = dim_;
    doc["seed"] = config_.seed;
    doc["slice"] = {{"label", slice_.label}, {"start", slice_.start}, {"end", slice_.end}};
    doc["config"] = {{"negatives", config_.negatives},
                     {"epochs", config_.epochs},
                     {"learning_rate", config_.learningRate},
                     {"unigram_power", config_.unigramPower},
                     {"max_doc_mentions", config_.maxDocMentions},
                     {"threads", config_.threads}};
    doc["truncated_docs"] = truncatedDocs_;
    Json vectors = Json::array();
    for (const auto& [entity, values] : vectors_) {
        Json entry;
        entry["canonical"] = entity.canonical;
        entry["type"] = toString(entity.type);
        entry["values"] = values;
        vectors.push_back(std::move(entry));
    }
    doc["vectors"] = std::move(vectors);
    out << doc.dump() << '\n';
}

EmbeddingSpace EmbeddingSpace::load(std::istream& in) {
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid embedding file: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "scitrend-embedding") {
        throw ParseError("not an embedding file (missing format marker)");
    }
    if (doc.value("version", 0) != kFormatVersion) {
        throw ParseError("unsupported embedding file version");
    }
    EmbeddingSpace space;
    try {
        space.dim_ = doc.at("dim").get<int>();
        space.config_.dim = space.dim_;
        space.config_.seed = doc.at("seed").get<std::uint64_t>();
        const auto& slice = doc.at("slice");
        space.slice_.label = slice.at("label").get<std::string>();
        space.slice_.start = slice.at("start").get<int>();
        space.slice_.end = slice.at("end").get<int>();
        const auto& config = doc.at("config");
        space.config_.negatives = config.at("negatives").get<int>();
        space.config_.epochs = config.at("epochs").get<int>();
        space.config_.learningRate = config.at("learning_rate").get<double>();
        space.config_.unigramPower = config.at("unigram_power").get<double>();
        space.config_.maxDocMentions = config.at("max_doc_mentions").get<std::size_t>();
        space.config_.threads = config.at("threads").get<int>();
        space.truncatedDocs_ = doc.at("truncated_docs").get<std::size_t>();
        for (const auto& entry : doc.at("vectors")) {
            Entity entity{entry.at("canonical").get<std::string>(),
                          entityTypeFromString(entry.at("type").get<std::string>())};
            auto values = entry.at("values").get<std::vector<double>>();
            if (static_cast<int>(values.size()) != space.dim_) {
                throw ParseError("vector length mismatch for \"" + entity.canonical + "\"");
            }
            space.vectors_.emplace(std::move(entity), std::move(values));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid embedding file: ") + e.what());
    }
    return space;
}

}  // namespace scitrend
