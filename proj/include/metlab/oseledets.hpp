#pragma once

#include "metlab/cocycle.hpp"
#include "metlab/grassmannian.hpp"
#include "metlab/kingman.hpp"
#include "metlab/opstats.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace metlab {

enum class Selection { enumerated, optimized };
std::string to_string(Selection s);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FastSpaceOptions {
    std::int64_t n_min = 1;
    std::int64_t n_max = 200;
    double stop_tol = 1e-6;
    Selection selection = Selection::optimized;
    std::uint64_t max_index = 100000;  // enumeration budget per n
    GrassBudget budget;
};

struct FastSpaceRecord {
    std::int64_t n = 0;
    Subspace pre;              // Ẽ⁽ⁿ⁾, chosen from L_{−n→n}
    Subspace E;                // E⁽ⁿ⁾ = L_{−n→0} Ẽ⁽ⁿ⁾
    std::uint64_t index = 0;   // enumeration index (enumerated selection)
    double log_growth = 0.0;   // log g(L_{−n→n}, Ẽ⁽ⁿ⁾)
    double log_rho = 0.0;      // log ρ_{m₁}(L_{−n→n})
    double gap = kNaN;         // d(E⁽ⁿ⁾, E⁽ⁿ⁺¹⁾)
};

struct FastSpaceRun {
    int m1 = 0;
    double eps = 0.0;
    std::vector<FastSpaceRecord> records;
    Subspace E_final;
    double slope = kNaN;  // least-squares slope of log gap_n against n
    bool converged = false;
    int retries = 0;
};

FastSpaceRun fast_space(const CocycleSystem& c, const BasePoint& w, int m1, double eps,
                        const FastSpaceOptions& opt = {});
// E⁽ⁿ⁾ at a single n
Subspace fast_space_at(const CocycleSystem& c, const BasePoint& w, int m1, double eps, std::int64_t n,
                       const FastSpaceOptions& opt = {});

using SubspaceField = std::function<Subspace(const BasePoint&)>;
// d(L_ω E(ω), E(σω))
double equivariance_residual(const CocycleSystem& c, const BasePoint& w, const SubspaceField& E);

struct SlowProjectionOptions {
    std::int64_t n_min = 1;
    std::int64_t n_max = 200;
    double stop_tol = 1e-10;  // on ‖Π⁽ⁿ⁺¹⁾ − Π⁽ⁿ⁾‖
    bool grid_check = true;
    std::int64_t grid_n_max = 6;        // n values at which the rational grid is scanned
    std::uint64_t grid_budget = 200000; // grid points per column and n
    Budget sphere;
};

// One scan of the dyadic coefficient grid for a column: the first q (in
// enumeration order) whose translate x_j − Σ q_i b_i meets the growth
// condition ‖L_{0→n} y‖ <= e^ε ρ_{k+1}(L_{0→n}) ‖y‖.
struct GridCheck {
    std::int64_t n = 0;
    int column = 0;
    std::vector<double> q;
    std::uint64_t index = 0;
    bool found = false;
    bool continuous_ok = false;  // the continuous translate meets the same condition
    double distance = kNaN;      // ‖grid translate − continuous translate‖ (Euclidean)
};

struct SlowRecord {
    std::int64_t n = 0;
    Mat Pi;
    double iterate_gap = kNaN;  // ‖Π⁽ⁿ⁾ − Π⁽ⁿ⁻¹⁾‖
};

struct SlowProjectionRun {
    std::vector<SlowRecord> records;
    Projection Pi_final;
    std::vector<GridCheck> grid;
    double slope = kNaN;
    bool converged = false;
};

SlowProjectionRun slow_projection(const CocycleSystem& c, const BasePoint& w, const Subspace& E, double eps,
                                  const SlowProjectionOptions& opt = {});

struct GrowthTrace {
    std::vector<TracePoint> trace;  // (n, (1/n) log‖L_{0→n} x‖)
    double rate = 0.0;
};
// Tail estimate: least-squares slope of log‖L_{0→n} x‖ over n in
// [fit_from·n_max, n_max]. A step that maps the vector below 1e-14 of
// ‖L‖‖v‖ counts as hitting the kernel (rate −∞).
GrowthTrace vector_growth(const CocycleSystem& c, const BasePoint& w, const Vec& x, std::int64_t n_max,
                          double fit_from = 1.0 / 3.0);
double vector_growth_rate(const CocycleSystem& c, const BasePoint& w, const Vec& x, std::int64_t n_max);

// Π at any base point: fast space then slow projection of the given
// cocycle, memoized by orbit position.
class ProjectionField {
public:
    ProjectionField(CocycleSystem c, int m, double eps, FastSpaceOptions fast, SlowProjectionOptions slow);

    Mat operator()(const BasePoint& w) const;
    Subspace fast(const BasePoint& w) const;
    const CocycleSystem& cocycle() const { return c_; }
    int m() const { return m_; }
    double eps() const { return eps_; }

private:
    struct State;
    CocycleSystem c_;
    int m_;
    double eps_;
    FastSpaceOptions fast_;
    SlowProjectionOptions slow_;
    std::shared_ptr<State> state_;
};

using MatrixField = std::function<Mat(const BasePoint&)>;

struct DeflateOptions {
    // apply Π only where ‖Π_ω‖ <= bound, and L_ω elsewhere
    bool restrict_to_A = false;
    double bound = 1e6;
    // singular values of L·Π below rank_tol ‖L‖‖Π‖ (Euclidean) are set to zero
    double rank_tol = 1e-8;
};
// L′_ω = L_ω ∘ Π_ω
CocycleSystem deflate(const CocycleSystem& c, MatrixField Pi, const DeflateOptions& opt = {});

std::vector<TracePoint> temperedness_profile(const MatrixField& Pi, const CocycleSystem& c, const BasePoint& w,
                                             const std::vector<std::int64_t>& ns);

struct DecompositionOptions {
    int L_target = 0;  // 0: every finite level of the pilot spectrum
    SpectrumOptions spectrum;
    FastSpaceOptions fast;
    SlowProjectionOptions slow;
    std::optional<double> eps_override;
    DeflateOptions deflate;
    std::int64_t growth_check_n = 20;
    int v_samples = 8;
    std::int64_t v_horizon = 30;
    std::vector<std::int64_t> temperedness_ns{8, 16, 32};
    std::uint64_t seed = 0;
};

struct Level {
    double lambda = 0.0;
    int m = 0;
    double eps = 0.0;
    Subspace E;
    FastSpaceRun fast;
    SlowProjectionRun slow;
    double equivariance = kNaN;
    double growth_lhs = kNaN;  // log g(L_{0→n}, E_1 ⊕ ... ⊕ E_l)
    double growth_rhs = kNaN;  // n (λ_l − 3ε)
    bool growth_ok = false;
};

struct Decomposition {
    SpectrumReport spectrum;
    std::vector<Level> levels;
    Projection Pi_slow;  // onto V_{L+1} along the fast spaces
    double idempotency = kNaN;
    double temperedness_slope = kNaN;
    int v_violations = 0;
    int v_tested = 0;
    int dimension_audit = 0;  // Σ m_i + rank Π_slow
    bool complete = false;
    std::string failure;
    std::vector<CocycleSystem> deflated;  // L′ after each level
    std::vector<std::shared_ptr<ProjectionField>> fields;
    MatrixField slow_field;  // composed Π at any base point
};

Decomposition full_decomposition(const CocycleSystem& c, const BasePoint& w, const DecompositionOptions& opt = {});

double fitted_slope(const std::vector<std::pair<double, double>>& xy);

}  // namespace metlab
