#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cskbr/core.hpp"
#include "cskbr/prompts.hpp"

namespace cskbr {

struct PoolTooSmall : std::runtime_error {
    PoolTooSmall(std::size_t k, std::size_t pool_size)
        : std::runtime_error("asked for " + std::to_string(k) + " exemplars from a pool of " +
                             std::to_string(pool_size)) {}
};

struct MissingEmbedding : std::runtime_error {
    explicit MissingEmbedding(std::int64_t id)
        : std::runtime_error("no embedding for instance " + std::to_string(id)) {}
};

struct InsufficientSameRelation : std::runtime_error {
    InsufficientSameRelation(Relation relation, std::size_t available, std::size_t k)
        : std::runtime_error("only " + std::to_string(available) + " pool instances share relation " +
                             std::string(to_string(relation)) + ", need " + std::to_string(k)) {}
};

// Unit-normalized sentence vectors keyed by instance id; cosine similarity
// reduces to a dot product.
class EmbeddingStore {
  public:
    explicit EmbeddingStore(std::size_t dimension);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return vectors_.size(); }
    bool contains(std::int64_t id) const { return vectors_.contains(id); }

    // Normalizes to unit L2 norm; rejects wrong dimensions and zero vectors.
    void add(std::int64_t id, std::vector<double> vector);
    const std::vector<double>& vector_for(std::int64_t id) const;

  private:
    std::size_t dimension_;
    std::unordered_map<std::int64_t, std::vector<double>> vectors_;
};

// File format: header "dimension=<d>", then one "<id>\t<v1> <v2> ... <vd>"
// line per instance.
EmbeddingStore load_embeddings_file(const std::string& path);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// k distinct instances drawn without replacement by a seeded generator,
// regardless of labels.
std::vector<Exemplar> select_random(std::span<const LabeledInstance> pool, std::size_t k,
                                    std::uint64_t seed);

// The k pool instances most similar to the query vector, ties broken by
// ascending id, returned least-similar-first so the strongest exemplar sits
// next to the query in the rendered prompt.
std::vector<Exemplar> select_kate(std::span<const LabeledInstance> pool,
                                  std::span<const double> query_vector,
                                  const EmbeddingStore& store, std::size_t k);

std::vector<Exemplar> select_kate(std::span<const LabeledInstance> pool,
                                  const LabeledInstance& query, const EmbeddingStore& store,
                                  std::size_t k);

// KATE restricted to pool instances sharing the query's relation.
std::vector<Exemplar> select_kate_s(std::span<const LabeledInstance> pool,
                                    const LabeledInstance& query, const EmbeddingStore& store,
                                    std::size_t k);

std::vector<Exemplar> select_kate_s(std::span<const LabeledInstance> pool,
                                    const LabeledInstance& query,
                                    std::span<const double> query_vector,
                                    const EmbeddingStore& store, std::size_t k);

}  // namespace cskbr
