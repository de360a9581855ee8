#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "scitrend/Corpus.h"

namespace scitrend {

// A paper reduced to its entity mentions, in document order.
struct EntitySequence {
    std::string paperId;
    std::vector<Entity> entities;
};

struct SgnsConfig {
    int dim = 100;
    int negatives = 5;
    int epochs = 5;
    double learningRate = 0.025;  // linearly decayed during training
    double unigramPower = 0.75;   // noise distribution exponent
    std::size_t maxDocMentions = 512;
    int threads = 1;  // >1 trades determinism for speed
    std::uint64_t seed = 1;
};

// Entity vectors trained on one time slice. Immutable once built.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;

    static EmbeddingSpace fromVectors(std::map<Entity, std::vector<double>> vectors, Period slice = {},
                                      std::uint64_t seed = 0);

    int dim() const { return dim_; }
    const Period& slice() const { return slice_; }
    std::uint64_t seed() const { return config_.seed; }
    const SgnsConfig& config() const { return config_; }
    std::size_t truncatedDocs() const { return truncatedDocs_; }
    const std::map<Entity, std::vector<double>>& vectors() const { return vectors_; }
    bool contains(const Entity& entity) const { return vectors_.find(entity) != vectors_.end(); }
    std::size_t size() const { return vectors_.size(); }

    void save(std::ostream& out) const;
    static EmbeddingSpace load(std::istream& in);

private:
    friend EmbeddingSpace trainSgns(const std::vector<EntitySequence>&, const SgnsConfig&, const Period&);

    int dim_ = 0;
    std::map<Entity, std::vector<double>> vectors_;
    Period slice_;
    SgnsConfig config_;
    std::size_t truncatedDocs_ = 0;
};

// One sequence per paper in the slice, mention order preserved; papers with
// fewer than two mentions are dropped (they yield no context pairs).
std::vector<EntitySequence> buildEntitySequences(const Corpus& corpus, const Period& slice);

// Skip-gram with negative sampling where the context window is the whole
// document: every ordered mention pair in a paper is a training pair.
// Bit-deterministic for a given config when threads == 1.
EmbeddingSpace trainSgns(const std::vector<EntitySequence>& sequences, const SgnsConfig& config,
                         const Period& slice = {});

// The l entities most cosine-similar to e, ties broken lexicographically.
std::vector<Entity> nearestNeighbors(const EmbeddingSpace& space, const Entity& e, std::size_t l = 5);

}  // namespace scitrend
