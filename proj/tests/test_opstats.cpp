#include "metlab/opstats.hpp"

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

Mat random_mat(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g;
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = g(rng);
    return M;
}

const Inequality& item(const CheckReport& r, const std::string& name) {
    for (const auto& it : r.items)
        if (it.name == name) return it;
    throw std::out_of_range(name);
}

const NormSpec kNorms[] = {NormSpec::l1(), NormSpec::l2(), NormSpec::linf()};

}  // namespace

TEST(MinGrowth, Examples) {
    std::mt19937_64 rng(1);
    Subspace V = Subspace::span(random_mat(rng, 3, 2));
    for (const auto& n : kNorms) EXPECT_NEAR(min_growth(Mat::Identity(3, 3), V, n), 1.0, 1e-9);
    EXPECT_NEAR(min_growth(diag({3, 1}), Subspace::coordinate(2, {0}), NormSpec::l2()), 3.0, 1e-12);
    for (const auto& n : kNorms) EXPECT_NEAR(min_growth(diag({1, 0}), Subspace::whole(2), n), 0.0, 1e-12);
}

TEST(MinGrowth, EuclideanIsSmallestSingularValueOfRestriction) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        Mat T = random_mat(rng, 4, 4);
        Subspace V = Subspace::span(random_mat(rng, 4, 2));
        Eigen::JacobiSVD<Mat> svd(T * V.basis());
        EXPECT_NEAR(min_growth(T, V, NormSpec::l2()), svd.singularValues()(1), 1e-9);
        EXPECT_NEAR(restricted_norm(T, V, NormSpec::l2()), svd.singularValues()(0), 1e-9);
    }
}

TEST(Bernstein, FirstIsOperatorNorm) {
    std::mt19937_64 rng(3);
    for (const auto& n : kNorms) {
        Mat T = random_mat(rng, 3, 3);
        EXPECT_NEAR(bernstein(T, 1, n).value, operator_norm(T, n), 1e-7 * operator_norm(T, n));
    }
}

TEST(Bernstein, DiagonalClosedFormAndOptimized) {
    Mat D = diag({3, 2, 1});
    GrassBudget cold;
    cold.euclidean_start = false;
    const double truth[] = {3, 2, 1};
    for (int k = 1; k <= 3; ++k) {
        EXPECT_NEAR(bernstein(D, k, NormSpec::l2(), Method::closed_form).value, truth[k - 1], 1e-12);
        auto opt = bernstein(D, k, NormSpec::l2(), Method::optimized, cold);
        EXPECT_EQ(opt.method, Method::optimized);
        EXPECT_NEAR(opt.value / truth[k - 1], 1.0, 5e-2);
        EXPECT_EQ(opt.witness.dim(), k);
    }
}

TEST(Bernstein, RankOneVanishes) {
    Mat T = Vec::Ones(3) * Vec::LinSpaced(3, 1, 3).transpose();
    for (const auto& n : kNorms) EXPECT_NEAR(bernstein(T, 2, n).value, 0.0, 1e-9);
}

TEST(Bernstein, WitnessAttainsValue) {
    std::mt19937_64 rng(4);
    for (const auto& n : {NormSpec::l1(), NormSpec::linf()}) {
        Mat T = random_mat(rng, 3, 3);
        auto r = bernstein(T, 2, n);
        EXPECT_NEAR(min_growth(T, r.witness, n), r.value, 1e-9 * r.value);
    }
}

TEST(Gelfand, Examples) {
    std::mt19937_64 rng(5);
    Mat T = random_mat(rng, 3, 3);
    for (const auto& n : kNorms) EXPECT_NEAR(gelfand(T, 1, n), operator_norm(T, n), 1e-7 * operator_norm(T, n));
    EXPECT_NEAR(gelfand(diag({3, 2, 1}), 2, NormSpec::l2()), 2.0, 1e-12);
    Mat R = random_mat(rng, 3, 2) * random_mat(rng, 2, 3);  // rank 2
    for (const auto& n : kNorms) EXPECT_NEAR(gelfand(R, 3, n), 0.0, 1e-9);
}

TEST(GrowthInequalities, Identity) {
    auto r = check_growth_inequalities(Mat::Identity(2, 2), Mat::Identity(2, 2), Subspace::whole(2), 2, NormSpec::l2());
    EXPECT_TRUE(r.pass);
    for (const auto& it : r.items) {
        EXPECT_NEAR(it.lhs, 1.0, 1e-12);
        EXPECT_NEAR(it.rhs, 1.0, 1e-12);
    }
}

TEST(GrowthInequalities, DiagonalPair) {
    // ST = diag(6, 1): ρ_2(ST) = 1, ρ_2(T)|S| = 2
    auto r = check_growth_inequalities(diag({3, 1}), diag({2, 1}), Subspace::whole(2), 2, NormSpec::l2());
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.values.at("rho_k(ST)"), 1.0, 1e-12);
    EXPECT_NEAR(item(r, "rho_k(ST) <= rho_k(T) |S|").rhs, 2.0, 1e-12);
}

TEST(GrowthInequalities, ProductLowerBoundIsNotAssumed) {
    // ρ_1(T)ρ_1(S) = 100 but ρ_1(ST) = 10
    auto r = check_growth_inequalities(diag({10, 1}), diag({1, 10}), Subspace::coordinate(2, {0}), 1, NormSpec::l2());
    EXPECT_FALSE(r.flags.at("product_lower_bound_holds"));
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.values.at("rho_k(ST)"), 10.0, 1e-12);
}

TEST(GrowthInequalities, RandomPairsAllNorms) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 24; ++i) {
        const auto& n = kNorms[i % 3];
        Mat T = random_mat(rng, 3, 3), S = random_mat(rng, 3, 3);
        Subspace V = Subspace::span(random_mat(rng, 3, 1 + i % 2));
        auto r = check_growth_inequalities(T, S, V, 1 + i % 3, n);
        EXPECT_TRUE(r.pass) << n.name() << " instance " << i << ": " << r.tightest()->name;
    }
}

TEST(Holds, Slack) {
    EXPECT_TRUE(holds(1.0, 1.0));
    EXPECT_TRUE(holds(1.0 + 1e-9, 1.0));
    EXPECT_FALSE(holds(1.001, 1.0));
}

TEST(Contraction, EqualSubspaces) {
    Subspace e1 = Subspace::coordinate(2, {0});
    auto r = check_contraction(diag({4, 0.5}), e1, e1, 2.0, NormSpec::l2());
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.actual, 0.0, 1e-12);
    EXPECT_NEAR(r.bound, 2.0 / 3.0, 1e-12);
    EXPECT_TRUE(r.simplified_applies);
    EXPECT_NEAR(r.simplified_bound, 1.0, 1e-12);
}

TEST(Contraction, NearbyLinesContract) {
    Subspace V = Subspace::span((Vec(2) << 1.0, 0.1).finished()), W = Subspace::span((Vec(2) << 1.0, -0.1).finished());
    for (const auto& n : kNorms) {
        auto r = check_contraction(diag({4, 0.5}), V, W, 2.0, n);
        EXPECT_TRUE(r.pass) << n.name();
        EXPECT_LT(r.actual, hausdorff_distance(V, W, n));
    }
}

TEST(Contraction, Preconditions) {
    Subspace e1 = Subspace::coordinate(2, {0}), e2 = Subspace::coordinate(2, {1});
    EXPECT_THROW(check_contraction(diag({4, 0.5}), e1, e1, 5.0, NormSpec::l2()), PreconditionError);
    EXPECT_THROW(check_contraction(diag({4, 0.5}), e1, e2, 2.0, NormSpec::l2()), PreconditionError);
}

TEST(Sandwich, Diagonal) {
    Projection P = oblique_projection(Subspace::coordinate(3, {1, 2}), Subspace::coordinate(3, {0}));
    auto r = check_sandwich(diag({5, 2, 1}), P, P, 1, 1, NormSpec::l2());
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.values.at("rho_{k+l}(T)"), 2.0, 1e-12);
    EXPECT_NEAR(r.values.at("rho_l(T Pi)"), 2.0, 1e-12);
    EXPECT_NEAR(item(r, "rho_l(T Pi) <= 4 |Pi| |Pi'| rho_{k+l}(T)").rhs, 8.0, 1e-12);
}

TEST(Sandwich, IdentityOperator) {
    std::mt19937_64 rng(7);
    Projection P = oblique_projection(Subspace::span(random_mat(rng, 3, 2)), Subspace::span(random_mat(rng, 3, 1)));
    auto r = check_sandwich(Mat::Identity(3, 3), P, P, 1, 1, NormSpec::l2());
    EXPECT_NEAR(r.values.at("rho_{k+l}(T)"), 1.0, 1e-12);
    EXPECT_LE(r.values.at("rho_l(T Pi)"), 4.0 * r.values.at("|Pi|") * r.values.at("|Pi'|"));
    EXPECT_TRUE(r.flags.at("hypothesis_ok"));
}

TEST(Sandwich, ConjugatedDiagonalInstances) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int i = 0; i < 12; ++i) {
        const auto& n = kNorms[i % 3];
        Mat C = random_mat(rng, 3, 3);
        Mat T = C * diag({6 * u(rng), u(rng), 0.2 * u(rng)}) * C.inverse();
        // Π kills the dominant eigendirection and keeps the other two
        Projection P = oblique_projection(Subspace::span(C.rightCols(2)), Subspace::span(C.col(0)));
        auto r = check_sandwich(T, P, P, 1, 1 + i % 2, n);
        EXPECT_TRUE(r.flags.at("hypothesis_ok"));
        EXPECT_TRUE(r.pass) << n.name() << " instance " << i << ": " << r.tightest()->name;
    }
}

TEST(SNumberChain, EuclideanEqualsSingularValues) {
    std::mt19937_64 rng(9);
    Mat T = random_mat(rng, 4, 4);
    Eigen::JacobiSVD<Mat> svd(T);
    auto r = check_snumber_chain(T, 4, NormSpec::l2());
    EXPECT_TRUE(r.pass);
    for (int k = 1; k <= 4; ++k) {
        EXPECT_NEAR(r.values.at("rho_" + std::to_string(k)), svd.singularValues()(k - 1), 1e-9);
        EXPECT_NEAR(r.values.at("s_" + std::to_string(k)), svd.singularValues()(k - 1), 1e-9);
    }
}

TEST(SNumberChain, FirstIsNormAndPolyhedralChainHolds) {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 8; ++i) {
        const auto& n = i % 2 ? NormSpec::l1() : NormSpec::linf();
        Mat T = random_mat(rng, 3, 3);
        auto r = check_snumber_chain(T, 3, n);
        EXPECT_TRUE(r.pass) << r.tightest()->name;
        EXPECT_NEAR(r.values.at("rho_1"), r.values.at("s_1"), 1e-7 * r.values.at("s_1"));
        EXPECT_NEAR(r.values.at("s_1"), operator_norm(T, n), 1e-7 * r.values.at("s_1"));
    }
    EXPECT_DOUBLE_EQ(snumber_constant(1), 1.0);
}

TEST(Digest, StableAndSensitive) {
    Mat A = diag({1, 2}), B = diag({1, 2.0000001});
    EXPECT_EQ(digest({&A}), digest({&A}));
    EXPECT_NE(digest({&A}), digest({&B}));
    EXPECT_NE(digest({&A}, "x"), digest({&A}, "y"));
}
