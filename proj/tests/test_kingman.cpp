#include "metlab/kingman.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace metlab;

namespace {

Mat diag(std::initializer_list<double> xs) {
    Mat D = Mat::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) D(i, i) = x, ++i;
    return D;
}

CocycleSystem constant(const Mat& A, const NormSpec& n = NormSpec::l2()) {
    return {BaseSystem::rotation(), Generator::constant(A), n, 1};
}

}  // namespace

TEST(Estimate, AdditiveProcessIsExactInEveryMode) {
    const double c = -0.375;  // dyadic, so c·n/n is exact
    SubadditiveProcess p{[c](const BasePoint&, std::int64_t a, std::int64_t b) { return c * double(b - a); }, "lin"};
    for (Mode m : kAllModes) {
        auto e = estimate(p, BasePoint{}, m, 200);
        EXPECT_EQ(e.C_hat, c) << to_string(m);
        for (const auto& pt : e.trace) EXPECT_EQ(pt.value, c);
    }
}

TEST(Estimate, DiagonalPowers) {
    auto c = constant(diag({2, 0.5}));
    for (Mode m : kAllModes) {
        auto e = estimate(log_norm_process(c), c.initial(), m, 64);
        EXPECT_NEAR(e.C_hat, std::log(2.0), 1e-6) << to_string(m);
        EXPECT_NEAR(e.trace.back().value, std::log(2.0), 1e-12);
        EXPECT_EQ(e.trace.back().n, 64);
    }
}

TEST(Estimate, IidScalarsMatchStrongLaw) {
    const std::vector<double> p = {0.25, 0.25, 0.5};
    const double a[] = {3.0, 0.2, -1.5};
    auto base = BaseSystem::bernoulli_shift(3, 21, p);
    double mean = 0.0, sq = 0.0;
    for (int s = 0; s < 3; ++s) {
        double l = std::log(std::abs(a[s]));
        mean += p[s] * l;
        sq += p[s] * l * l;
    }
    const double sd = std::sqrt(sq - mean * mean);
    const std::int64_t N = 4000;
    auto proc = additive_process(base, [&](const BasePoint& w) { return std::log(std::abs(a[base.symbol(w)])); });
    for (Mode m : kAllModes) {
        auto e = estimate(proc, base.initial(5), m, N, {0.25, 200, 1});
        EXPECT_NEAR(e.C_hat, mean, 3.0 * sd / std::sqrt(0.75 * N)) << to_string(m);
    }
}

TEST(Estimate, Validation) {
    SubadditiveProcess p{[](const BasePoint&, std::int64_t, std::int64_t) { return 0.0; }, "zero"};
    EXPECT_THROW(estimate(p, BasePoint{}, Mode::forward, 4), std::invalid_argument);
    EXPECT_THROW(estimate(p, BasePoint{}, Mode::forward, 64, {0.0, 10, 1}), std::invalid_argument);
    SubadditiveProcess bad{[](const BasePoint&, std::int64_t, std::int64_t) { return std::nan(""); }, "nan"};
    EXPECT_THROW(estimate(bad, BasePoint{}, Mode::forward, 64), std::runtime_error);
}

TEST(Estimate, ModeNames) {
    for (Mode m : kAllModes) EXPECT_EQ(mode_from_string(to_string(m)), m);
    EXPECT_THROW(mode_from_string("sideways"), std::invalid_argument);
}

TEST(TraceGrid, Shape) {
    auto small = trace_grid(10, 1000);
    ASSERT_EQ(small.size(), 10u);
    EXPECT_EQ(small.front(), 1);
    auto big = trace_grid(5000, 1000);
    EXPECT_EQ(big.size(), 1000u);
    EXPECT_EQ(big.back(), 5000);
    EXPECT_TRUE(std::is_sorted(big.begin(), big.end()));
    EXPECT_EQ(std::adjacent_find(big.begin(), big.end()), big.end());
}

TEST(TailMedian, Values) {
    std::vector<TracePoint> t;
    for (int n = 1; n <= 8; ++n) t.push_back({n, double(n)});
    EXPECT_DOUBLE_EQ(tail_median(t, 0.25), 7.0);  // n >= 6: {6, 7, 8}
    EXPECT_DOUBLE_EQ(tail_median(t, 1.0), 4.5);
    t.back().value = kNegInf;
    EXPECT_EQ(tail_median(t, 0.25), kNegInf);
    EXPECT_THROW(tail_median({}, 0.5), std::invalid_argument);
}

TEST(Subadditivity, LogNormPasses) {
    Mat A(2, 2), B(2, 2);
    A << 1, 2, 0, 1;
    B << 0.5, 0, 1, 3;
    for (const auto& n : {NormSpec::l1(), NormSpec::l2(), NormSpec::linf()}) {
        CocycleSystem c(BaseSystem::bernoulli_shift(2, 3), Generator::symbol_table({A, B}), n, 1);
        auto r = check_subadditivity(log_norm_process(c), c.base(), 100, 4);
        EXPECT_TRUE(r.pass) << n.name() << " " << r.worst_violation;
        EXPECT_EQ(r.samples, 100);
    }
}

TEST(Subadditivity, LogBernsteinFirstAndCompoundsPass) {
    Mat A(3, 3), B(3, 3);
    A << 1, 2, 0, 0, 1, 1, 0.5, 0, 2;
    B << 0.5, 0, 1, 1, 3, 0, 0, 1, 1;
    CocycleSystem c(BaseSystem::bernoulli_shift(2, 5), Generator::symbol_table({A, B}), NormSpec::l1(), 1);
    auto r = check_subadditivity(log_bernstein_process(c, 1), c.base(), 25, 6, 8);
    EXPECT_TRUE(r.pass) << r.worst_violation;
    for (int k = 1; k <= 3; ++k) EXPECT_TRUE(check_subadditivity(log_compound_process(c, k), c.base(), 50, 7).pass);
}

TEST(Subadditivity, LogBernsteinBeyondFirstIsNotSubadditive) {
    // ρ_2(diag(10,1)) ρ_2(diag(1,10)) = 1 while ρ_2 of the product is 10
    Mat S = Mat::Zero(2, 2), T = Mat::Zero(2, 2);
    S.diagonal() << 10, 1;
    T.diagonal() << 1, 10;
    SubadditiveProcess p{[&](const BasePoint&, std::int64_t a, std::int64_t b) {
                             Mat P = Mat::Identity(2, 2);
                             for (std::int64_t t = a; t < b; ++t) P = (t % 2 ? T : S) * P;
                             return std::log(bernstein(P, 2, NormSpec::l2()).value);
                         },
                         "log-bernstein-2"};
    EXPECT_NEAR(p(BasePoint{}, 0, 2) - p(BasePoint{}, 0, 1) - p(BasePoint{}, 1, 2), std::log(10.0), 1e-12);
    EXPECT_FALSE(check_subadditivity(p, BaseSystem::rotation(), 30, 2, 6).pass);
}

TEST(Subadditivity, SuperadditiveFails) {
    SubadditiveProcess sq{[](const BasePoint&, std::int64_t a, std::int64_t b) { return double((b - a) * (b - a)); },
                          "square"};
    auto r = check_subadditivity(sq, BaseSystem::rotation(), 20, 1);
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.worst_violation, 1.0);
    EXPECT_DOUBLE_EQ(r.worst_violation, double((r.b - r.a) * (r.b - r.a) - (r.c - r.a) * (r.c - r.a) -
                                               (r.b - r.c) * (r.b - r.c)));
}

TEST(Spectrum, DiagonalExact) {
    auto c = constant(diag({3, 2, 1}));
    auto r = lyapunov_spectrum(c, c.initial(), {0, 64});
    const double truth[] = {std::log(3.0), std::log(2.0), 0.0};
    ASSERT_EQ(r.mu.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(r.mu[i], truth[i], 1e-9);
        EXPECT_NEAR(r.lambda[i], truth[i], 1e-9);
        EXPECT_EQ(r.multiplicity[i], 1);
    }
    EXPECT_TRUE(r.monotone);
    EXPECT_EQ(r.cumulative.size(), 3u);
}

TEST(Spectrum, DiagonalizableMatchesEigenvalues) {
    Mat P(3, 3);
    P << 1, 0.5, 0.2, 0.3, 1, -0.4, 0, 0.6, 1;
    Mat A = P * diag({3, 1, -1}) * P.inverse();
    Eigen::EigenSolver<Mat> es(A);
    std::vector<double> logs;
    for (int i = 0; i < 3; ++i) logs.push_back(std::log(std::abs(es.eigenvalues()(i))));
    std::sort(logs.rbegin(), logs.rend());
    auto c = constant(A);
    auto r = lyapunov_spectrum(c, c.initial(), {0, 1000});
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.mu[i], logs[i], 1e-2);
    ASSERT_EQ(r.lambda.size(), 2u);
    EXPECT_EQ(r.multiplicity[0], 1);
    EXPECT_EQ(r.multiplicity[1], 2);
}

TEST(Spectrum, ConjugatedIidDiagonal) {
    Mat P(2, 2);
    P << 1, 0.7, -0.2, 1;
    std::vector<Vec> diags = {(Vec(2) << 3.0, 0.5).finished(), (Vec(2) << 1.5, -2.0).finished(),
                              (Vec(2) << 0.8, 0.1).finished()};
    CocycleSystem c(BaseSystem::bernoulli_shift(3, 17), Generator::conjugated_diagonal(P, diags), NormSpec::l2(), 17);
    double l1 = 0.0, l2 = 0.0;
    for (const Vec& dv : diags) l1 += std::log(std::abs(dv(0))) / 3, l2 += std::log(std::abs(dv(1))) / 3;
    if (l1 < l2) std::swap(l1, l2);
    auto r = lyapunov_spectrum(c, c.initial(), {0, 5000});
    EXPECT_NEAR(r.mu[0], l1, 0.05);
    EXPECT_NEAR(r.mu[1], l2, 0.05);
}

TEST(Spectrum, RankDeficientGivesMinusInfinity) {
    auto c = constant(diag({2, 1, 0}));
    auto r = lyapunov_spectrum(c, c.initial(), {0, 64});
    EXPECT_NEAR(r.mu[0], std::log(2.0), 1e-9);
    EXPECT_EQ(r.mu[2], kNegInf);
    EXPECT_EQ(r.nu_hat, kNegInf);
    EXPECT_EQ(r.above_nu, 2);
}

TEST(Spectrum, ThreadsDoNotChangeResults) {
    CocycleSystem c(BaseSystem::bernoulli_shift(3, 2),
                    Generator::conjugated_diagonal(Mat::Identity(3, 3), {Vec::LinSpaced(3, 1, 3), Vec::LinSpaced(3, 3, 0.5),
                                                                          Vec::Ones(3)}),
                    NormSpec::l2(), 2);
    SpectrumOptions one{0, 500}, three{0, 500};
    three.estimate.threads = 3;
    auto a = lyapunov_spectrum(c, c.initial(), one), b = lyapunov_spectrum(c, c.initial(), three);
    EXPECT_EQ(a.mu, b.mu);
}

TEST(Cluster, Gaps) {
    std::vector<double> lambda;
    std::vector<int> m;
    cluster_exponents({1.0, 0.95, 0.5, kNegInf, kNegInf}, 0.1, lambda, m);
    EXPECT_EQ(lambda, (std::vector<double>{1.0, 0.5, kNegInf}));
    EXPECT_EQ(m, (std::vector<int>{2, 1, 2}));
    cluster_exponents({0.3, 0.1}, 0.1, lambda, m);
    EXPECT_EQ(m, (std::vector<int>{1, 1}));
}
