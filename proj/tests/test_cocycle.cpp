#include "metlab/cocycle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace metlab;

namespace {

Mat random_mat(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g;
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = g(rng);
    return M;
}

std::vector<Mat> random_table(std::uint64_t seed, int count, int d) {
    std::mt19937_64 rng(seed);
    std::vector<Mat> out;
    for (int i = 0; i < count; ++i) out.push_back(random_mat(rng, d, d));
    return out;
}

// L_{a→b}(ω) = L(σ^{b−1}ω) ⋯ L(σ^aω), one factor at a time
Mat naive_product(const CocycleSystem& c, const BasePoint& w, std::int64_t a, std::int64_t b) {
    Mat P = Mat::Identity(c.dim(), c.dim());
    for (std::int64_t t = a; t < b; ++t) P = c.at(c.base().orbit(w, t)) * P;
    return P;
}

double rel(const Mat& A, const Mat& B) { return (A - B).norm() / std::max(1e-300, B.norm()); }

CocycleSystem shift_system(std::uint64_t key, int d = 3) {
    return {BaseSystem::bernoulli_shift(4, key), Generator::symbol_table(random_table(key, 4, d)), NormSpec::l2(), key};
}

}  // namespace

TEST(BaseSystem, OrbitRoundTrip) {
    for (const auto& base : {BaseSystem::rotation(), BaseSystem::cat_map(), BaseSystem::bernoulli_shift(3, 5)}) {
        BasePoint w = base.initial(9);
        BasePoint back = base.orbit(base.orbit(w, 7), -7);
        EXPECT_EQ(base.state(back), base.state(w));
        EXPECT_EQ(base.state(base.orbit(w, -7)), base.state(base.orbit(base.orbit(w, -3), -4)));
    }
}

TEST(BaseSystem, RotationStepsByAlpha) {
    auto base = BaseSystem::rotation(0.3);
    BasePoint w = base.initial(1);
    double x0 = base.coordinate(w), x1 = base.coordinate(base.orbit(w, 1));
    EXPECT_NEAR(std::fmod(x0 + 0.3, 1.0), x1, 1e-12);
    EXPECT_NEAR(base.alpha(), 0.3, 1e-15);
}

TEST(BaseSystem, CatMapIsTheToralAutomorphism) {
    auto base = BaseSystem::cat_map();
    BasePoint w = base.initial(2);
    auto [x, y] = base.state(w);
    auto [x1, y1] = base.state(base.orbit(w, 1));
    const unsigned __int128 Q = BaseSystem::Q;
    EXPECT_EQ(x1, static_cast<std::uint64_t>((2 * static_cast<unsigned __int128>(x) + y) % Q));
    EXPECT_EQ(y1, static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) + y) % Q));
    auto [xm, ym] = base.state(base.orbit(w, -1));
    EXPECT_EQ(static_cast<std::uint64_t>((2 * static_cast<unsigned __int128>(xm) + ym) % Q), x);
    EXPECT_EQ(static_cast<std::uint64_t>((static_cast<unsigned __int128>(xm) + ym) % Q), y);
}

TEST(BaseSystem, ShiftSymbolFrequencies) {
    auto base = BaseSystem::bernoulli_shift(3, 11, {0.5, 0.3, 0.2});
    BasePoint w = base.initial(4);
    const int N = 40000;
    std::vector<int> count(3, 0);
    for (int t = -N / 2; t < N / 2; ++t) ++count[base.symbol(base.orbit(w, t))];
    const double p[] = {0.5, 0.3, 0.2};
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(count[s] / double(N), p[s], 4 * std::sqrt(p[s] * (1 - p[s]) / N));
}

TEST(BaseSystem, ShiftReplayIsDeterministic) {
    auto a = BaseSystem::bernoulli_shift(4, 77), b = BaseSystem::bernoulli_shift(4, 77);
    for (int t = -50; t < 50; ++t) EXPECT_EQ(a.symbol(a.orbit(a.initial(3), t)), b.symbol(b.orbit(b.initial(3), t)));
    auto c = BaseSystem::bernoulli_shift(4, 78);
    int same = 0;
    for (int t = 0; t < 200; ++t) same += a.symbol(a.orbit(a.initial(3), t)) == c.symbol(c.orbit(c.initial(3), t));
    EXPECT_LT(same, 120);
}

TEST(BaseSystem, Validation) {
    EXPECT_THROW(BaseSystem::bernoulli_shift(2, 1, {0.6, 0.6}), std::invalid_argument);
    EXPECT_THROW(BaseSystem::bernoulli_shift(0, 1), std::invalid_argument);
    EXPECT_THROW(BaseSystem::rotation(2.0), std::invalid_argument);
}

TEST(Generator, Kinds) {
    Mat P(2, 2);
    P << 1, 0.5, 0, 1;
    auto g = Generator::conjugated_diagonal(P, {(Vec(2) << 2, 3).finished()});
    EXPECT_LT(rel(g.matrices()[0], P * Vec((Vec(2) << 2, 3).finished()).asDiagonal() * P.inverse()), 1e-15);

    Mat A = Mat::Identity(2, 2), B = 2 * Mat::Identity(2, 2);
    auto cell = Generator::rotation_cell({0.5}, {A, B});
    auto base = BaseSystem::rotation();
    for (int t = 0; t < 20; ++t) {
        BasePoint w = base.orbit(base.initial(1), t);
        EXPECT_EQ(cell(base, w), base.coordinate(w) < 0.5 ? A : B);
    }
    EXPECT_THROW(Generator::rotation_cell({0.5}, {A}), std::invalid_argument);
    EXPECT_THROW(Generator::conjugated_diagonal(Mat::Zero(2, 2), {Vec::Ones(2)}), std::invalid_argument);
}

TEST(Evaluate, EmptyIntervalIsIdentity) {
    auto c = shift_system(1);
    BasePoint w = c.initial();
    EXPECT_EQ(c.evaluate_interval(w, 5, 5).dense(), Mat::Identity(3, 3));
    EXPECT_THROW(c.evaluate_interval(w, 5, 4), std::invalid_argument);
}

TEST(Evaluate, ConstantPower) {
    Mat A(2, 2);
    A << 1, 2, -1, 0.5;
    CocycleSystem c(BaseSystem::rotation(), Generator::constant(A), NormSpec::l2(), 1);
    EXPECT_LT(rel(c.evaluate_interval(c.initial(), 0, 3).dense(), A * A * A), 1e-14);
}

TEST(Evaluate, MatchesNaiveProduct) {
    auto c = shift_system(2);
    BasePoint w = c.initial();
    for (auto [a, b] : {std::pair<int, int>{0, 1}, {-5, 9}, {3, 40}, {-37, -2}, {0, 64}}) {
        Mat fast = c.evaluate_interval(w, a, b).dense();
        EXPECT_LT(rel(fast, naive_product(c, w, a, b)), 1e-10) << a << " " << b;
    }
}

TEST(Evaluate, CompositionProperty) {
    auto c = shift_system(3);
    BasePoint w = c.initial();
    for (auto [a, m, b] : {std::tuple<int, int, int>{0, 7, 20}, {-13, 0, 13}, {-30, -11, 5}}) {
        Mat lhs = c.evaluate_interval(w, a, b).dense();
        Mat rhs = c.evaluate_interval(w, m, b).dense() * c.evaluate_interval(w, a, m).dense();
        EXPECT_LT(rel(lhs, rhs), 1e-10);
    }
}

TEST(Evaluate, StationarityIsExact) {
    for (const auto& base : {BaseSystem::rotation(), BaseSystem::cat_map(), BaseSystem::bernoulli_shift(4, 6)}) {
        auto gen = base.kind() == BaseSystem::Kind::bernoulli_shift
                       ? Generator::symbol_table(random_table(6, 4, 2))
                       : Generator::rotation_cell({0.3, 0.7}, random_table(6, 3, 2));
        CocycleSystem c(base, gen, NormSpec::l2(), 5);
        BasePoint w = c.initial();
        for (int l : {-9, 4, 17}) {
            auto x = c.evaluate_interval(base.orbit(w, l), 2, 30), y = c.evaluate_interval(w, 2 + l, 30 + l);
            EXPECT_EQ(x.m, y.m);
            EXPECT_EQ(x.log_scale, y.log_scale);
        }
    }
}

TEST(Evaluate, DeterministicAcrossInstances) {
    auto c1 = shift_system(8), c2 = shift_system(8);
    auto x = c1.evaluate_interval(c1.initial(), -100, 300), y = c2.evaluate_interval(c2.initial(), -100, 300);
    EXPECT_EQ(x.m, y.m);
    EXPECT_EQ(x.log_scale, y.log_scale);
}

TEST(Evaluate, LongProductsStayScaled) {
    CocycleSystem c(BaseSystem::rotation(), Generator::constant(10.0 * Mat::Identity(2, 2)), NormSpec::l2(), 1);
    auto s = c.evaluate_interval(c.initial(), 0, 1000);
    EXPECT_TRUE(s.m.allFinite());
    EXPECT_NEAR(s.log_norm(NormSpec::l2()), 1000 * std::log(10.0), 1e-8);
}

TEST(Compound, CauchyBinetAndSingularValues) {
    std::mt19937_64 rng(4);
    Mat A = random_mat(rng, 4, 4), B = random_mat(rng, 4, 4);
    for (int k = 1; k <= 4; ++k) EXPECT_LT(rel(compound(A * B, k), compound(A, k) * compound(B, k)), 1e-12);
    Eigen::JacobiSVD<Mat> sa(A), sc(compound(A, 2));
    EXPECT_NEAR(sc.singularValues()(0), sa.singularValues()(0) * sa.singularValues()(1), 1e-10);
    EXPECT_NEAR(compound(A, 4)(0, 0), A.determinant(), 1e-10);
}

TEST(Compound, IntervalMatchesFactorwiseCompounds) {
    // long products are ill-conditioned, so compare against ∧^k of each factor
    auto c = shift_system(5, 4);
    BasePoint w = c.initial();
    for (int k = 1; k <= 4; ++k) {
        const auto N = compound(Mat::Identity(4, 4), k).rows();
        Mat P = Mat::Identity(N, N);
        for (int t = -6; t < 10; ++t) P = compound(c.at(c.base().orbit(w, t)), k) * P;
        EXPECT_LT(rel(c.compound_interval(w, -6, 10, k).dense(), P), 1e-10);
    }
}

TEST(Compound, LogSvSumOnShortInterval) {
    auto c = shift_system(5, 4);
    BasePoint w = c.initial();
    Mat L = naive_product(c, w, -2, 2);
    Eigen::JacobiSVD<Mat> svd(L);
    double partial = 0.0;
    for (int k = 1; k <= 4; ++k) {
        partial += std::log(svd.singularValues()(k - 1));
        EXPECT_NEAR(c.log_sv_sum(w, -2, 2, k), partial, 1e-9 * std::max(1.0, std::abs(partial)));
    }
    EXPECT_NEAR(c.log_norm(w, -2, 2), std::log(svd.singularValues()(0)), 1e-10);
}

TEST(Compound, RankDeficientFactorGivesMinusInfinity) {
    Mat A = Mat::Identity(3, 3);
    A(2, 2) = 0.0;
    CocycleSystem c(BaseSystem::rotation(), Generator::constant(A), NormSpec::l2(), 1);
    EXPECT_EQ(c.log_sv_sum(c.initial(), 0, 5, 3), kNegInf);
    EXPECT_NEAR(c.log_sv_sum(c.initial(), 0, 5, 2), 0.0, 1e-14);
}

TEST(Cache, HitsAndLimit) {
    auto c = shift_system(9);
    BasePoint w = c.initial();
    Mat first = c.evaluate_interval(w, 0, 512).dense();
    auto s1 = c.cache_stats();
    Mat again = c.evaluate_interval(w, 0, 512).dense();
    auto s2 = c.cache_stats();
    EXPECT_EQ(first, again);
    EXPECT_EQ(s2.misses, s1.misses);
    EXPECT_GT(s2.hits, s1.hits);

    c.clear_cache();
    EXPECT_EQ(c.cache_stats().entries, 0u);
    c.set_cache_limit(32);
    EXPECT_EQ(c.evaluate_interval(w, 0, 512).dense(), first);
    EXPECT_LE(c.cache_stats().entries, 32u);
}

TEST(Integrability, ConstantCases) {
    CocycleSystem contract(BaseSystem::rotation(), Generator::constant(0.5 * Mat::Identity(2, 2)), NormSpec::l2(), 1);
    EXPECT_DOUBLE_EQ(integrability_estimate(contract, 50, 1).mean, 0.0);
    CocycleSystem twice(BaseSystem::rotation(), Generator::constant(2.0 * Mat::Identity(2, 2)), NormSpec::l2(), 1);
    EXPECT_NEAR(integrability_estimate(twice, 50, 1).mean, std::log(2.0), 1e-15);
}

TEST(Integrability, SymbolTableClosedForm) {
    auto table = random_table(10, 3, 2);
    std::vector<double> p = {0.2, 0.5, 0.3};
    CocycleSystem c(BaseSystem::bernoulli_shift(3, 12, p), Generator::symbol_table(table), NormSpec::linf(), 1);
    double truth = 0.0;
    for (int s = 0; s < 3; ++s) {
        double rowsum = table[s].cwiseAbs().rowwise().sum().maxCoeff();
        truth += p[s] * std::max(0.0, std::log(rowsum));
    }
    auto e = integrability_estimate(c, 4000, 3);
    EXPECT_GT(e.stderr_, 0.0);
    EXPECT_NEAR(e.mean, truth, 3 * e.stderr_);
}

TEST(Cocycle, Validation) {
    EXPECT_THROW(CocycleSystem(BaseSystem::bernoulli_shift(5, 1), Generator::symbol_table(random_table(1, 3, 2)),
                               NormSpec::l2(), 1),
                 std::invalid_argument);
    EXPECT_THROW(CocycleSystem(BaseSystem::rotation(), Generator::constant(Mat::Identity(2, 2)),
                               NormSpec::weighted(2.0, Vec::Ones(3)), 1),
                 std::invalid_argument);
}
