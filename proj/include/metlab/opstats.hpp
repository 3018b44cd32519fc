#pragma once

#include "metlab/grassmannian.hpp"
#include "metlab/normed.hpp"

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace metlab {

enum class Method { automatic, closed_form, optimized, enumerated };
std::string to_string(Method m);

struct GrowthReport {
    int k = 0;
    double value = 0.0;
    Subspace witness;
    Method method = Method::closed_form;
    double certified_gap = 0.0;  // slack of the inner evaluation at the witness
};

struct GrassBudget {
    int halton_starts = 8;
    int refine = 3;
    double tol = 1e-7;
    int max_evals = 20000;
    std::uint64_t enumeration = 2000;  // indices scanned by Method::enumerated
    bool euclidean_start = true;       // also start from the singular subspaces
    Budget sphere;                     // inner budget for non-polyhedral norms
};

// g(T, V): inf of ‖Tx‖ over the unit sphere of V.
double min_growth(const Mat& T, const Subspace& V, const NormSpec& n, const Budget& budget = {});
// ‖T|_V‖
double restricted_norm(const Mat& T, const Subspace& V, const NormSpec& n, const Budget& budget = {});

GrowthReport bernstein(const Mat& T, int k, const NormSpec& n, Method method = Method::automatic,
                       const GrassBudget& budget = {});
double gelfand(const Mat& T, int k, const NormSpec& n, Method method = Method::automatic,
               const GrassBudget& budget = {});

// Multi-start pattern search over 𝒢_k(R^d) in affine charts around each
// start; F receives a Euclidean-orthonormal d×k basis.
struct ChartResult {
    double value = 0.0;
    Subspace best;
};
ChartResult grassmann_optimize(Eigen::Index d, Eigen::Index k, const std::function<double(const Mat&)>& F,
                               Extremum mode, const std::vector<Mat>& starts, const GrassBudget& budget = {});

struct Inequality {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = true;
    double slack() const { return rhs - lhs; }
};

struct CheckReport {
    std::string lemma;
    std::string inputs_digest;
    std::vector<Inequality> items;
    std::map<std::string, double> values;
    std::map<std::string, bool> flags;
    bool pass = true;

    // item with the smallest relative slack
    const Inequality* tightest() const;
};

// Relative slack factor used by every inequality check.
inline constexpr double kCheckSlack = 1e-6;
// lhs <= rhs (1 + kCheckSlack) + abs_floor
bool holds(double lhs, double rhs, double abs_floor = 0.0);

CheckReport check_growth_inequalities(const Mat& T, const Mat& S, const Subspace& V, int k, const NormSpec& n);

struct ContractionReport {
    double rho_k = 0.0;
    double rho_k1 = 0.0;
    double bound = 0.0;
    double simplified_bound = std::numeric_limits<double>::quiet_NaN();  // when Θ > 2ρ_{k+1}
    double actual = 0.0;
    bool pass = false;
    bool simplified_applies = false;
    bool simplified_pass = true;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

ContractionReport check_contraction(const Mat& T, const Subspace& V, const Subspace& W, double theta,
                                    const NormSpec& n);

CheckReport check_sandwich(const Mat& T, const Projection& Pi, const Projection& PiPrime, int k, int l,
                           const NormSpec& n);

CheckReport check_snumber_chain(const Mat& T, int k_max, const NormSpec& n);

// 4^{k-1} sqrt((k-1)!)
double snumber_constant(int k);

std::string digest(const std::vector<const Mat*>& mats, const std::string& extra = {});

}  // namespace metlab
