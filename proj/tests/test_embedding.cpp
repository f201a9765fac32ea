#include "commscore/embedding.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace commscore;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v) x = n(rng);
    return EmbeddingVector(std::move(v));
}

} // namespace

TEST(EmbeddingVector, RejectsZeroAndEmpty) {
    EXPECT_THROW(vec({0.0, 0.0}), Error);
    EXPECT_THROW(vec({}), Error);
    EXPECT_THROW(vec({1.0, std::nan("")}), Error);
    EXPECT_EQ(vec({0.0, 2.0}).dimension(), 2u);
}

TEST(CosineSim, Examples) {
    EXPECT_DOUBLE_EQ(cosine_sim(vec({1, 0}), vec({0, 1})), 0.0);
    EXPECT_DOUBLE_EQ(cosine_sim(vec({1, 1}), vec({1, -1})), 0.0);
    // Absolute value: antipodal vectors are maximally similar.
    EXPECT_DOUBLE_EQ(cosine_sim(vec({1, 0}), vec({-1, 0})), 1.0);
    EXPECT_NEAR(cosine_sim(vec({3, 4}), vec({3, 4})), 1.0, 1e-9);
    EXPECT_NEAR(cosine_sim(vec({1, 0}), vec({1, 1})), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(CosineSim, Errors) {
    try {
        cosine_sim(vec({1, 0}), vec({1, 0, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Argument);
    }
    // Squares underflow to zero.
    EXPECT_THROW(cosine_sim(vec({1e-200, 0}), vec({1, 0})), Error);
}

TEST(CosineSim, AlgebraicProperties) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> scale(-100.0, 100.0);
    std::uniform_int_distribution<std::size_t> dim(1, 96);
    for (int i = 0; i < 500; ++i) {
        const auto d = dim(rng);
        auto a = random_vector(rng, d), b = random_vector(rng, d);
        const double ab = cosine_sim(a, b);
        EXPECT_NEAR(ab, cosine_sim(b, a), 1e-12);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        double k = scale(rng);
        if (k == 0.0) k = 1.0;
        std::vector<double> ka(a.values().begin(), a.values().end());
        for (auto& x : ka) x *= k;
        EXPECT_NEAR(cosine_sim(vec(ka), b), ab, 1e-9);
        EXPECT_NEAR(cosine_sim(a, a), 1.0, 1e-9);
    }
}
