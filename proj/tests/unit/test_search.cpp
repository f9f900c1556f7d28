#include <sscd/error.hpp>
#include <sscd/search.hpp>
#include <sscd/vector_math.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sscd;

namespace {

void expect_same_list(const std::vector<CloneCandidate>& got, const std::vector<CloneCandidate>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].query_id, want[i].query_id);
        EXPECT_EQ(got[i].hit_id, want[i].hit_id) << "rank " << i + 1;
        EXPECT_EQ(got[i].rank, want[i].rank);
        EXPECT_NEAR(got[i].similarity, want[i].similarity, 1e-12);
    }
}

SearchParams params(std::size_t k, double floor) {
    SearchParams p;
    p.k = k;
    p.ef_search = std::max<std::size_t>(k, 120);
    p.similarity_floor = floor;
    return p;
}

}  // namespace

TEST(Cosine, Examples) {
    std::vector<float> v = {0.3f, -1.2f, 4.0f};
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
    EXPECT_EQ(cosine(std::vector<float>{1, 0, 0}, std::vector<float>{0, 1, 0}), 0.0);
    // (3,4)/5 . (4,3)/5 = 24/25
    std::vector<float> a = {3.0f / 5, 4.0f / 5};
    std::vector<float> b = {4.0f / 5, 3.0f / 5};
    EXPECT_NEAR(cosine(a, b), 0.96, 1e-7);
    EXPECT_NEAR(cosine(std::vector<float>{3, 4}, std::vector<float>{4, 3}), 0.96, 1e-12);
}

TEST(Cosine, Errors) {
    EXPECT_THROW(cosine(std::vector<float>{0, 0}, std::vector<float>{1, 0}), std::invalid_argument);
    EXPECT_THROW(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 0, 0}), std::invalid_argument);
}

TEST(Cosine, SymmetricAndBounded) {
    std::mt19937_64 rng(1);
    std::normal_distribution<float> normal;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t d = 1 + rng() % 50;
        std::vector<float> a(d), b(d);
        for (auto& x : a) x = normal(rng);
        for (auto& x : b) x = normal(rng);
        if (l2_norm(a) == 0 || l2_norm(b) == 0) continue;
        double ab = cosine(a, b);
        ASSERT_EQ(ab, cosine(b, a));
        ASSERT_GE(ab, -1.0);
        ASSERT_LE(ab, 1.0);
    }
}

TEST(SearchParams, Validation) {
    SearchParams p;
    EXPECT_NO_THROW(validate(p));
    p.k = 0;
    EXPECT_THROW(validate(p), InputError);
    p = {};
    p.k = 200;
    EXPECT_THROW(validate(p), InputError);  // ef_search < k
    p = {};
    p.similarity_floor = 1.5;
    EXPECT_THROW(validate(p), InputError);
    EXPECT_THROW(parse_search_type("lsh"), InputError);
}

TEST(ExactSearch, TwoIdenticalVectors) {
    std::vector<EmbeddingVector> v = {{0, {0.6f, 0.8f}}, {1, {0.6f, 0.8f}}};
    ExactIndex index(v);
    auto hits = exact_search(index, 0, params(1, 0.0));
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].hit_id, 1u);
    EXPECT_NEAR(hits[0].similarity, 1.0, 1e-7);
    EXPECT_EQ(hits[0].rank, 1u);
}

TEST(ExactSearch, FloorFiltersEverything) {
    std::vector<EmbeddingVector> v = {{0, {1, 0, 0}}, {1, {0, 1, 0}}, {2, {0.6f, 0, 0.8f}}};
    ExactIndex index(v);
    EXPECT_TRUE(exact_search(index, 0, params(10, 0.95)).empty());
}

TEST(ExactSearch, UnknownIdAndBadVectors) {
    std::vector<EmbeddingVector> v = {{5, {1, 0}}};
    ExactIndex index(v);
    EXPECT_THROW(exact_search(index, 6, params(1, 0)), std::out_of_range);
    EXPECT_TRUE(exact_search(index, 5, params(1, -1)).empty());
    std::vector<EmbeddingVector> not_unit = {{0, {2, 0}}};
    EXPECT_THROW(ExactIndex{not_unit}, InputError);
    std::vector<EmbeddingVector> dup = {{0, {1, 0}}, {0, {0, 1}}};
    EXPECT_THROW(ExactIndex{dup}, InputError);
    ExactIndex empty;
    EXPECT_EQ(search_all(empty, params(1, 0)).lists.size(), 0u);
}

TEST(ExactSearch, FiveRandomVectorsMatchOracle) {
    std::mt19937_64 rng(99);
    auto v = sscd::testing::gaussian_unit_vectors(5, 16, rng);
    ExactIndex index(v);
    for (std::size_t q = 0; q < 5; ++q) expect_same_list(exact_search(index, q, params(3, -1)), sscd::testing::naive_top_k(v, q, 3, -1));
}

TEST(ExactSearch, TiesBrokenByAscendingId) {
    // ids deliberately out of row order
    std::vector<EmbeddingVector> v = {{9, {1, 0}}, {4, {0, 1}}, {7, {0, 1}}, {2, {0, 1}}, {3, {1, 0}}};
    ExactIndex index(v);
    auto hits = exact_search(index, 9, params(4, -1));
    std::vector<FragmentId> ids;
    for (const auto& h : hits) ids.push_back(h.hit_id);
    EXPECT_EQ(ids, (std::vector<FragmentId>{3, 2, 4, 7}));
}

TEST(ExactSearch, RandomInstancesMatchOracle) {
    std::mt19937_64 rng(2024);
    for (int instance = 0; instance < 60; ++instance) {
        std::size_t n = 2 + rng() % 150;
        std::size_t d = instance % 2 ? 8 : 64;
        auto v = instance % 3 == 0 ? sscd::testing::lattice_unit_vectors(n, d, rng) : sscd::testing::gaussian_unit_vectors(n, d, rng, 1000);
        ExactIndex index(v);
        std::size_t k = 1 + rng() % 12;
        double floor = std::uniform_real_distribution<double>(-1.0, 0.6)(rng);
        for (std::size_t q = 0; q < n; ++q) {
            expect_same_list(exact_search(index, v[q].fragment_id, params(k, floor)), sscd::testing::naive_top_k(v, q, k, floor));
        }
    }
}

TEST(SearchAll, ListSizes) {
    std::vector<EmbeddingVector> three = {{0, {1, 0}}, {1, {0, 1}}, {2, {0.6f, 0.8f}}};
    ExactIndex index(three);
    auto out = search_all(index, params(2, -1));
    ASSERT_EQ(out.lists.size(), 3u);
    for (const auto& l : out.lists) EXPECT_EQ(l.size(), 2u);
    EXPECT_GE(out.search_ms, 0.0);

    std::mt19937_64 rng(4);
    auto v = sscd::testing::gaussian_unit_vectors(20, 8, rng);
    ExactIndex big(v);
    for (const auto& l : search_all(big, params(50, -1)).lists) EXPECT_EQ(l.size(), 19u);
}

TEST(SearchAll, ThreadCountDoesNotChangeLists) {
    std::mt19937_64 rng(12);
    auto v = sscd::testing::gaussian_unit_vectors(300, 32, rng);
    ExactIndex index(v);
    auto one = search_all(index, params(10, 0.0), 1).lists;
    auto four = search_all(index, params(10, 0.0), 4).lists;
    EXPECT_EQ(one, four);
}

TEST(SearchProperties, ListInvariants) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = sscd::testing::gaussian_unit_vectors(2 + rng() % 60, 1 + rng() % 16, rng);
        ExactIndex index(v);
        std::size_t k = 1 + rng() % 10;
        double floor = std::uniform_real_distribution<double>(-1, 1)(rng);
        for (const auto& list : search_all(index, params(k, floor)).lists) {
            ASSERT_LE(list.size(), k);
            for (std::size_t i = 0; i < list.size(); ++i) {
                ASSERT_NE(list[i].query_id, list[i].hit_id);
                ASSERT_EQ(list[i].rank, i + 1);
                ASSERT_GE(list[i].similarity, floor);
                ASSERT_GE(list[i].similarity, -1.0);
                ASSERT_LE(list[i].similarity, 1.0);
                if (i > 0) {
                    ASSERT_LE(list[i].similarity, list[i - 1].similarity);
                }
            }
        }
    }
}

TEST(SearchProperties, SigmaAndKMonotonicity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        auto v = trial % 2 ? sscd::testing::lattice_unit_vectors(3 + rng() % 30, 8, rng)
                           : sscd::testing::gaussian_unit_vectors(3 + rng() % 30, 6, rng);
        ExactIndex index(v);
        std::size_t q = rng() % v.size();
        std::size_t k = 1 + rng() % 12;
        std::size_t j = 1 + rng() % k;
        double lo = std::uniform_real_distribution<double>(-1, 1)(rng);
        double hi = std::uniform_real_distribution<double>(lo, 1)(rng);
        auto at_lo = exact_search(index, v[q].fragment_id, params(k, lo));
        auto at_hi = exact_search(index, v[q].fragment_id, params(k, hi));
        // raising the floor keeps a prefix of the list: no additions, order kept
        ASSERT_LE(at_hi.size(), at_lo.size());
        for (std::size_t i = 0; i < at_hi.size(); ++i) ASSERT_EQ(at_hi[i], at_lo[i]);
        for (std::size_t i = at_hi.size(); i < at_lo.size(); ++i) ASSERT_LT(at_lo[i].similarity, hi);
        // the top-j of a k list is the j list
        auto at_j = exact_search(index, v[q].fragment_id, params(j, lo));
        ASSERT_EQ(at_j, std::vector<CloneCandidate>(at_lo.begin(), at_lo.begin() + static_cast<std::ptrdiff_t>(std::min(j, at_lo.size()))));
    }
}

TEST(RankHits, ExcludesAndCuts) {
    std::vector<ScoredHit> hits = {{1, 0.5}, {2, 0.9}, {3, 0.9}, {4, 0.1}, {5, 1.0}};
    auto out = rank_hits(5, hits, 3, 0.2, FragmentId{5});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].hit_id, 2u);
    EXPECT_EQ(out[1].hit_id, 3u);
    EXPECT_EQ(out[2].hit_id, 1u);
    EXPECT_EQ(out[2].rank, 3u);
    EXPECT_TRUE(rank_hits(1, {}, 3, 0, std::nullopt).empty());
}
