#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace metlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct NormSpec {
    enum class Kind { L1, L2, Linf, WeightedLp };

    Kind kind = Kind::L2;
    double p = 2.0;
    Vec weights;

    static NormSpec l1() { return {Kind::L1, 1.0, {}}; }
    static NormSpec l2() { return {Kind::L2, 2.0, {}}; }
    static NormSpec linf() { return {Kind::Linf, 0.0, {}}; }
    static NormSpec weighted(double p, Vec w);

    // throws std::invalid_argument when p < 1, a weight is not positive,
    // or the weight vector does not match d
    void validate(Eigen::Index d) const;
    std::string name() const;

    bool operator==(const NormSpec& o) const;
};

// (Σ w_i |x_i|^p)^{1/p} for WeightedLp.
double norm(const Vec& x, const NormSpec& n);

struct Operator {
    Mat entries;
    NormSpec domain = NormSpec::l2();
    NormSpec codomain = NormSpec::l2();
};

double operator_norm(const Mat& T, const NormSpec& n);
double operator_norm(const Operator& T);

// Default local-search tolerance of the sphere and Grassmannian optimizers.
inline constexpr double kTauOpt = 1e-7;

enum class Extremum { min, max };

struct Budget {
    int starts = 0;     // 0 means 64 * dim
    int refine = 4;     // local searches launched from the best seeds
    double tol = 1e-7;  // final step size in chart coordinates
    int max_evals = 200000;
};

struct ExtremeResult {
    double value = 0.0;
    Vec argpoint;
};

using SphereFn = std::function<double(const Vec&)>;

// Extremizes f over the unit sphere (in n) of the column span of `basis`.
// Points are basis*u/‖basis*u‖ with u on the Euclidean sphere; seeding is a
// fixed Halton sequence, so results are deterministic. `extra_starts` are
// u-coordinates tried before the Halton seeds.
ExtremeResult sphere_extremize(const SphereFn& f, const Mat& basis, const NormSpec& n,
                               Extremum mode, const Budget& budget = {},
                               const std::vector<Vec>& extra_starts = {});

// sup and inf of ‖T x‖/‖x‖ over nonzero x in span(B), both in norm n.
// Closed form for L2; exact vertex enumeration for polyhedral norms
// (L1, Linf, WeightedLp with p = 1); sphere_extremize otherwise.
struct RatioResult {
    double value = 0.0;
    Vec witness;  // unit vector in n attaining the value
    bool exact = true;
};
RatioResult ratio_sup(const Mat& T, const Mat& B, const NormSpec& n, const Budget& budget = {});
RatioResult ratio_inf(const Mat& T, const Mat& B, const NormSpec& n, const Budget& budget = {});

// Polyhedral view of a norm as ‖D x‖_1 or ‖D x‖_inf with D diagonal.
struct Polyhedral {
    bool l1 = true;
    Vec scale;
};
std::optional<Polyhedral> polyhedral(const NormSpec& n, Eigen::Index d);

// Vertices of {u : ‖D M u‖_q <= 1} for M with full column rank.
std::vector<Vec> polytope_vertices(const Mat& M, const Polyhedral& poly);

Mat orthonormalize(const Mat& B, double rank_tol = 1e-12);

// Low-discrepancy point in [0,1)^dim.
Vec halton(std::size_t index, Eigen::Index dim);

}  // namespace metlab
