#include "metlab/oseledets.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace metlab;

namespace {

Mat diag(std::initializer_list<double> xs) {
    Mat D = Mat::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) D(i, i) = x, ++i;
    return D;
}

Mat jordanlike() {
    Mat J(2, 2);
    J << 2, 1, 0, 0.5;
    return J;
}

CocycleSystem constant(const Mat& A) { return {BaseSystem::rotation(), Generator::constant(A), NormSpec::l2(), 1}; }

// spectral projection of A onto the eigenvectors with |λ| below the top one, along the top one
Mat eigenprojection(const Mat& A) {
    Eigen::EigenSolver<Mat> es(A);
    Mat V = es.eigenvectors().real();
    Vec mods = es.eigenvalues().cwiseAbs();
    Eigen::Index top;
    mods.maxCoeff(&top);
    Mat D = Mat::Identity(A.rows(), A.rows());
    D(top, top) = 0.0;
    return V * D * V.inverse();
}

std::vector<double> spectrum_of(const CocycleSystem& c, std::int64_t n = 64) {
    return lyapunov_spectrum(c, c.initial(), {0, n}).mu;
}

}  // namespace

TEST(FastSpace, InvariantDominantAxis) {
    auto c = constant(diag({2, 0.5}));
    auto run = fast_space(c, c.initial(), 1, 0.1, {1, 40});
    ASSERT_FALSE(run.records.empty());
    for (const auto& r : run.records)
        EXPECT_LT(largest_principal_angle(r.E, Subspace::coordinate(2, {0})), 1e-12) << "n = " << r.n;
    EXPECT_TRUE(run.converged);
}

TEST(FastSpace, JordanlikeConvergesGeometrically) {
    auto c = constant(jordanlike());
    FastSpaceOptions opt{1, 30};
    opt.stop_tol = 0.0;
    auto run = fast_space(c, c.initial(), 1, 0.1, opt);
    EXPECT_LT(largest_principal_angle(run.E_final, Subspace::coordinate(2, {0})), 1e-10);
    // the gap shrinks like 4^{-n}
    EXPECT_LT(run.slope, 0.8 * -std::log(4.0));
    for (const auto& r : run.records) EXPECT_GE(r.log_growth, r.log_rho - 0.1 - 1e-9);
}

TEST(FastSpace, EnumeratedSelection) {
    auto c = constant(jordanlike());
    FastSpaceOptions opt{1, 20};
    opt.selection = Selection::enumerated;
    auto run = fast_space(c, c.initial(), 1, 0.1, opt);
    EXPECT_LT(largest_principal_angle(run.E_final, Subspace::coordinate(2, {0})), 1e-6);
    EXPECT_GE(run.records.front().index, 1u);
    EXPECT_EQ(to_string(Selection::enumerated), "enumerated");
}

TEST(FastSpace, SingleNMatchesRun) {
    auto c = constant(diag({3, 1, 0.25}));
    Subspace E = fast_space_at(c, c.initial(), 1, 0.1, 12);
    EXPECT_TRUE(E == Subspace::coordinate(3, {0}));
}

TEST(Equivariance, ExactAndPerturbed) {
    auto c = constant(jordanlike());
    Subspace e1 = Subspace::coordinate(2, {0});
    EXPECT_LT(equivariance_residual(c, c.initial(), [&](const BasePoint&) { return e1; }), 1e-10);
    Subspace tilted = Subspace::span((Vec(2) << 1.0, 0.1).finished());
    EXPECT_GE(equivariance_residual(c, c.initial(), [&](const BasePoint&) { return tilted; }), 0.05);
}

TEST(SlowProjection, Diagonal) {
    auto c = constant(diag({2, 0.5}));
    auto run = slow_projection(c, c.initial(), Subspace::coordinate(2, {0}), 0.1, {1, 40});
    EXPECT_LT((run.Pi_final.matrix - diag({0, 1})).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(run.converged);
    ASSERT_FALSE(run.grid.empty());
    for (const auto& g : run.grid) {
        EXPECT_TRUE(g.found);
        EXPECT_TRUE(g.continuous_ok);
    }
}

TEST(SlowProjection, JordanlikeEigenprojection) {
    Mat J = jordanlike();
    auto c = constant(J);
    auto run = slow_projection(c, c.initial(), Subspace::coordinate(2, {0}), 0.1, {1, 80});
    Mat oracle = eigenprojection(J);
    Mat hand(2, 2);
    hand << 0, -2.0 / 3.0, 0, 1;
    EXPECT_LT((oracle - hand).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((run.Pi_final.matrix - oracle).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(run.Pi_final.idempotency_residual(), 1e-8);
}

TEST(VectorGrowth, Examples) {
    auto c = constant(diag({2, 0.5}));
    EXPECT_EQ(vector_growth_rate(c, c.initial(), Vec::Zero(2), 64), kNegInf);
    EXPECT_NEAR(vector_growth_rate(c, c.initial(), Vec::Unit(2, 0), 64), std::log(2.0), 1e-12);
    EXPECT_NEAR(vector_growth_rate(c, c.initial(), Vec::Unit(2, 1), 64), std::log(0.5), 1e-12);
    EXPECT_NEAR(vector_growth_rate(c, c.initial(), Vec::Ones(2), 64), std::log(2.0), 1e-9);
    auto k = constant(diag({2, 0}));
    EXPECT_EQ(vector_growth_rate(k, k.initial(), Vec::Unit(2, 1), 64), kNegInf);
    auto tr = vector_growth(c, c.initial(), Vec::Unit(2, 0), 16);
    EXPECT_EQ(tr.trace.size(), 16u);
    EXPECT_NEAR(tr.trace.back().value, std::log(2.0), 1e-12);
}

TEST(Temperedness, ConstantProfileAndScaleInvariance) {
    Mat J = jordanlike();
    FastSpaceOptions fast{1, 60};
    SlowProjectionOptions slow{1, 80};
    ProjectionField field(constant(J), 1, 0.1, fast, slow), scaled(constant(3.0 * J), 1, 0.1, fast, slow);
    std::vector<std::int64_t> ns{1, 4, 16, 64};
    auto a = temperedness_profile(field, field.cocycle(), field.cocycle().initial(), ns);
    auto b = temperedness_profile(scaled, scaled.cocycle(), scaled.cocycle().initial(), ns);
    const double lognorm = std::log(std::sqrt(1.0 + 4.0 / 9.0));  // ‖[[0,-2/3],[0,1]]‖
    ASSERT_EQ(a.size(), ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        EXPECT_EQ(a[i].n, ns[i]);
        EXPECT_NEAR(a[i].value * static_cast<double>(ns[i]), lognorm, 1e-6);
        EXPECT_NEAR(a[i].value, b[i].value, 1e-9);
    }
}

TEST(Deflate, KillingTopAxis) {
    auto c = constant(diag({3, 2, 1}));
    auto d = deflate(c, [](const BasePoint&) { return diag({0, 1, 1}); });
    auto mu = spectrum_of(d);
    EXPECT_NEAR(mu[0], std::log(2.0), 1e-9);
    EXPECT_NEAR(mu[1], 0.0, 1e-9);
    EXPECT_EQ(mu[2], kNegInf);

    auto dd = deflate(d, [](const BasePoint&) { return diag({0, 0, 1}); });
    auto mu2 = spectrum_of(dd);
    EXPECT_NEAR(mu2[0], 0.0, 1e-9);
    EXPECT_EQ(mu2[1], kNegInf);
}

TEST(Deflate, RestrictionToBoundedSet) {
    auto c = constant(diag({3, 2, 1}));
    DeflateOptions opt;
    opt.restrict_to_A = true;
    opt.bound = 0.5;  // ‖Π‖ = 1 exceeds it everywhere, so L is kept
    auto d = deflate(c, [](const BasePoint&) { return diag({0, 1, 1}); }, opt);
    EXPECT_NEAR(spectrum_of(d)[0], std::log(3.0), 1e-9);
}

TEST(Decomposition, ConstantDiagonal) {
    auto c = constant(diag({3, 1, 0.25}));
    DecompositionOptions opt;
    opt.spectrum.n_max = 64;
    auto dec = full_decomposition(c, c.initial(), opt);
    ASSERT_TRUE(dec.complete) << dec.failure;
    ASSERT_EQ(dec.levels.size(), 3u);
    const double truth[] = {std::log(3.0), 0.0, std::log(0.25)};
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(dec.levels[i].lambda, truth[i], 1e-6);
        EXPECT_EQ(dec.levels[i].m, 1);
        EXPECT_LT(largest_principal_angle(dec.levels[i].E, Subspace::coordinate(3, {i})), 1e-8);
        EXPECT_TRUE(dec.levels[i].growth_ok);
    }
    EXPECT_EQ(dec.dimension_audit, 3);
    EXPECT_LT(dec.Pi_slow.matrix.cwiseAbs().maxCoeff(), 1e-8);  // V_4 = {0}
    EXPECT_EQ(dec.v_violations, 0);
}

TEST(Decomposition, JordanlikeProjection) {
    Mat J = jordanlike();
    auto c = constant(J);
    DecompositionOptions opt;
    opt.L_target = 1;
    opt.spectrum.n_max = 256;
    opt.slow.n_max = 80;
    auto dec = full_decomposition(c, c.initial(), opt);
    ASSERT_TRUE(dec.complete) << dec.failure;
    EXPECT_LT((dec.Pi_slow.matrix - eigenprojection(J)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(dec.idempotency, 1e-8);
}

TEST(Fit, Slope) {
    EXPECT_NEAR(fitted_slope({{0, 1}, {1, 3}, {2, 5}, {5, 11}}), 2.0, 1e-14);
}
