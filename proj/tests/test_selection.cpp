#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "cskbr/selection.hpp"

using namespace cskbr;

namespace {

std::vector<LabeledInstance> make_pool(std::size_t n, Relation relation = Relation::xWant) {
    std::vector<LabeledInstance> pool;
    for (std::size_t i = 0; i < n; ++i) {
        pool.push_back({static_cast<std::int64_t>(i),
                        make_triple("head " + std::to_string(i), relation,
                                    "tail " + std::to_string(i)),
                        static_cast<int>(i % 2), "train"});
    }
    return pool;
}

EmbeddingStore random_store(std::size_t dimension, std::span<const LabeledInstance> pool,
                            std::mt19937_64& rng, std::int64_t extra_id = -1) {
    EmbeddingStore store(dimension);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto add = [&](std::int64_t id) {
        std::vector<double> vector(dimension);
        for (double& v : vector) v = gauss(rng);
        store.add(id, std::move(vector));
    };
    for (const LabeledInstance& instance : pool) add(instance.id);
    if (extra_id >= 0) add(extra_id);
    return store;
}

// exhaustive-scan oracle: every cosine, full sort, top k (most similar first)
std::vector<std::int64_t> brute_force_top_k(std::span<const LabeledInstance> pool,
                                            std::span<const double> query,
                                            const EmbeddingStore& store, std::size_t k) {
    std::vector<std::pair<double, std::int64_t>> scored;
    for (const LabeledInstance& instance : pool) {
        scored.emplace_back(cosine_similarity(query, store.vector_for(instance.id)), instance.id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < k; ++i) ids.push_back(scored[i].second);
    return ids;
}

}  // namespace

TEST_CASE("select_random draws distinct instances deterministically") {
    auto pool = make_pool(100);
    auto first = select_random(pool, 5, 7);
    auto second = select_random(pool, 5, 7);
    REQUIRE(first.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(first[i].instance.id == second[i].instance.id);
        CHECK_FALSE(first[i].rationale.has_value());
    }
    std::set<std::int64_t> ids;
    for (const Exemplar& exemplar : first) ids.insert(exemplar.instance.id);
    CHECK(ids.size() == 5);

    auto other_seed = select_random(pool, 5, 8);
    bool any_difference = false;
    for (std::size_t i = 0; i < 5; ++i) {
        any_difference |= other_seed[i].instance.id != first[i].instance.id;
    }
    CHECK(any_difference);
}

TEST_CASE("select_random edge cases") {
    auto pool = make_pool(5);
    auto all = select_random(pool, 5, 123);
    std::set<std::int64_t> ids;
    for (const Exemplar& exemplar : all) ids.insert(exemplar.instance.id);
    CHECK(ids == std::set<std::int64_t>{0, 1, 2, 3, 4});

    auto tiny = make_pool(3);
    CHECK_THROWS_AS(select_random(tiny, 5, 0), PoolTooSmall);
}

TEST_CASE("embedding store normalizes and validates") {
    EmbeddingStore store(3);
    store.add(1, {3.0, 0.0, 4.0});
    const auto& unit = store.vector_for(1);
    CHECK(std::abs(std::sqrt(unit[0] * unit[0] + unit[1] * unit[1] + unit[2] * unit[2]) - 1.0) <
          1e-9);
    CHECK_THROWS_AS(store.add(2, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(store.add(3, {0.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(store.vector_for(99), MissingEmbedding);
}

TEST_CASE("embedding files load with the documented header") {
    auto path = (std::filesystem::temp_directory_path() / "cskbr_embeddings.tsv").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "dimension=3\n";
        out << "0\t1.0 0.0 0.0\n";
        out << "1\t0.0 2.0 0.0\n";
    }
    EmbeddingStore store = load_embeddings_file(path);
    CHECK(store.dimension() == 3);
    CHECK(store.size() == 2);
    CHECK(store.vector_for(1)[1] == doctest::Approx(1.0));  // normalized
    std::remove(path.c_str());
}

TEST_CASE("embedding files reject bad headers and dimension drift") {
    auto write = [](const std::string& name, const std::string& content) {
        auto path = (std::filesystem::temp_directory_path() / name).string();
        std::ofstream out(path, std::ios::binary);
        out << content;
        return path;
    };
    auto no_header = write("cskbr_emb_bad1.tsv", "0\t1.0 0.0\n");
    CHECK_THROWS(load_embeddings_file(no_header));
    auto short_vector = write("cskbr_emb_bad2.tsv", "dimension=3\n0\t1.0 0.0\n");
    CHECK_THROWS(load_embeddings_file(short_vector));
    auto no_tab = write("cskbr_emb_bad3.tsv", "dimension=2\n0 1.0 0.0\n");
    CHECK_THROWS(load_embeddings_file(no_tab));
    CHECK_THROWS(load_embeddings_file("/nonexistent/embeddings.tsv"));
    for (const char* name : {"cskbr_emb_bad1.tsv", "cskbr_emb_bad2.tsv", "cskbr_emb_bad3.tsv"}) {
        std::remove((std::filesystem::temp_directory_path() / name).string().c_str());
    }
}

TEST_CASE("select_kate ranks an identical vector first") {
    auto pool = make_pool(4);
    EmbeddingStore store(2);
    store.add(0, {1.0, 0.0});
    store.add(1, {0.0, 1.0});
    store.add(2, {-1.0, 0.0});
    store.add(3, {0.7, 0.7});
    std::vector<double> query{1.0, 0.0};
    auto selected = select_kate(pool, query, store, 2);
    REQUIRE(selected.size() == 2);
    // most similar comes last
    CHECK(selected.back().instance.id == 0);
    CHECK(selected.front().instance.id == 3);
}

TEST_CASE("orthogonal queries fall back to the id tie-break") {
    auto pool = make_pool(4);
    EmbeddingStore store(2);
    for (std::int64_t id = 0; id < 4; ++id) store.add(id, {1.0, 0.0});
    std::vector<double> query{0.0, 1.0};
    auto selected = select_kate(pool, query, store, 2);
    REQUIRE(selected.size() == 2);
    CHECK(selected.front().instance.id == 1);
    CHECK(selected.back().instance.id == 0);
}

TEST_CASE("select_kate matches the brute-force oracle on random pools") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto pool = make_pool(10);
        auto store = random_store(8, pool, rng, 1000);
        const auto& query = store.vector_for(1000);
        auto selected = select_kate(pool, query, store, 3);
        auto expected = brute_force_top_k(pool, query, store, 3);
        REQUIRE(selected.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(selected[2 - i].instance.id == expected[i]);
        }
    }
}

TEST_CASE("pool order never changes the selected set") {
    std::mt19937_64 rng(7);
    auto pool = make_pool(12);
    auto store = random_store(4, pool, rng, 500);
    const auto& query = store.vector_for(500);
    auto baseline = select_kate(pool, query, store, 4);
    std::vector<LabeledInstance> shuffled(pool.begin(), pool.end());
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto reshuffled = select_kate(shuffled, query, store, 4);
    std::set<std::int64_t> a, b;
    for (const auto& exemplar : baseline) a.insert(exemplar.instance.id);
    for (const auto& exemplar : reshuffled) b.insert(exemplar.instance.id);
    CHECK(a == b);
}

TEST_CASE("select_kate_s equals select_kate on the same-relation sub-pool") {
    std::mt19937_64 rng(4242);
    std::vector<LabeledInstance> pool;
    for (std::size_t i = 0; i < 26; ++i) {
        Relation relation = i < 6 ? Relation::xReact : Relation::xWant;
        pool.push_back({static_cast<std::int64_t>(i),
                        make_triple("h" + std::to_string(i), relation, "t" + std::to_string(i)),
                        1, "train"});
    }
    auto store = random_store(6, pool, rng, 999);
    LabeledInstance query{999, make_triple("qh", Relation::xReact, "qt"), 1, "test"};

    auto via_kate_s = select_kate_s(pool, query, store, 5);
    std::vector<LabeledInstance> filtered(pool.begin(), pool.begin() + 6);
    auto via_filtered = select_kate(filtered, store.vector_for(999), store, 5);
    REQUIRE(via_kate_s.size() == via_filtered.size());
    for (std::size_t i = 0; i < via_kate_s.size(); ++i) {
        CHECK(via_kate_s[i].instance.id == via_filtered[i].instance.id);
        CHECK(via_kate_s[i].instance.triple.relation == Relation::xReact);
    }

    LabeledInstance rare{999, make_triple("qh", Relation::xAttr, "qt"), 1, "test"};
    CHECK_THROWS_AS(select_kate_s(pool, rare, store, 5), InsufficientSameRelation);
}

TEST_CASE("missing embeddings are reported by id") {
    auto pool = make_pool(3);
    EmbeddingStore store(2);
    store.add(0, {1.0, 0.0});
    store.add(1, {1.0, 0.0});
    std::vector<double> query{1.0, 0.0};
    CHECK_THROWS_AS(select_kate(pool, query, store, 2), MissingEmbedding);
}
