#include "cskbr/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace cskbr {

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw std::invalid_argument("embedding dimension must be positive");
}

void EmbeddingStore::add(std::int64_t id, std::vector<double> vector) {
    if (vector.size() != dimension_) {
        throw std::invalid_argument("vector for instance " + std::to_string(id) + " has dimension " +
                                    std::to_string(vector.size()) + ", store expects " +
                                    std::to_string(dimension_));
    }
    double norm_sq = 0.0;
    for (double v : vector) norm_sq += v * v;
    if (norm_sq <= 0.0 || !std::isfinite(norm_sq)) {
        throw std::invalid_argument("vector for instance " + std::to_string(id) +
                                    " is zero or non-finite");
    }
    double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (double& v : vector) v *= inv_norm;
    vectors_[id] = std::move(vector);
}

const std::vector<double>& EmbeddingStore::vector_for(std::int64_t id) const {
    auto it = vectors_.find(id);
    if (it == vectors_.end()) throw MissingEmbedding(id);
    return it->second;
}

EmbeddingStore load_embeddings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("dimension=", 0) != 0) {
        throw std::runtime_error("embeddings file must start with 'dimension=<d>': " + path);
    }
    std::size_t dimension = std::stoul(header.substr(10));
    EmbeddingStore store(dimension);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected '<id>\\t<values>'");
        }
        std::int64_t id = std::stoll(line.substr(0, tab));
        std::istringstream values(line.substr(tab + 1));
        std::vector<double> vector;
        vector.reserve(dimension);
        double v = 0.0;
        while (values >> v) vector.push_back(v);
        store.add(id, std::move(vector));
    }
    return store;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector dimensions differ");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<Exemplar> select_random(std::span<const LabeledInstance> pool, std::size_t k,
                                    std::uint64_t seed) {
    if (k > pool.size()) throw PoolTooSmall(k, pool.size());
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates: the first k slots are a uniform draw without replacement
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::vector<Exemplar> selected;
    selected.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        selected.push_back(Exemplar{pool[order[i]], std::nullopt});
    }
    return selected;
}

std::vector<Exemplar> select_kate(std::span<const LabeledInstance> pool,
                                  std::span<const double> query_vector,
                                  const EmbeddingStore& store, std::size_t k) {
    if (k > pool.size()) throw PoolTooSmall(k, pool.size());
    struct Scored {
        double similarity;
        std::int64_t id;
        std::size_t index;
    };
    std::vector<Scored> scored;
    scored.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& vector = store.vector_for(pool[i].id);
        scored.push_back({cosine_similarity(query_vector, vector), pool[i].id, i});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    });
    // most similar last, so it ends up adjacent to the query in the prompt
    std::vector<Exemplar> selected;
    selected.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        selected.push_back(Exemplar{pool[scored[k - 1 - i].index], std::nullopt});
    }
    return selected;
}

std::vector<Exemplar> select_kate(std::span<const LabeledInstance> pool,
                                  const LabeledInstance& query, const EmbeddingStore& store,
                                  std::size_t k) {
    return select_kate(pool, store.vector_for(query.id), store, k);
}

std::vector<Exemplar> select_kate_s(std::span<const LabeledInstance> pool,
                                    const LabeledInstance& query,
                                    std::span<const double> query_vector,
                                    const EmbeddingStore& store, std::size_t k) {
    std::vector<LabeledInstance> same_relation;
    for (const LabeledInstance& instance : pool) {
        if (instance.triple.relation == query.triple.relation) same_relation.push_back(instance);
    }
    if (same_relation.size() < k) {
        throw InsufficientSameRelation(query.triple.relation, same_relation.size(), k);
    }
    return select_kate(same_relation, query_vector, store, k);
}

std::vector<Exemplar> select_kate_s(std::span<const LabeledInstance> pool,
                                    const LabeledInstance& query, const EmbeddingStore& store,
                                    std::size_t k) {
    return select_kate_s(pool, query, store.vector_for(query.id), store, k);
}

}  // namespace cskbr
