#pragma once

#include "metlab/cocycle.hpp"
#include "metlab/opstats.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace metlab {

enum class Mode { forward, backward, window, balanced };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
inline constexpr Mode kAllModes[] = {Mode::forward, Mode::backward, Mode::window, Mode::balanced};

// numerical slack for subadditivity checks
inline constexpr double kTauNum = 1e-8;

// f_{a→b}(ω); −∞ allowed.
struct SubadditiveProcess {
    std::function<double(const BasePoint&, std::int64_t, std::int64_t)> f;
    std::string tag;

    double operator()(const BasePoint& w, std::int64_t a, std::int64_t b) const { return f(w, a, b); }
};

struct TracePoint {
    std::int64_t n = 0;
    double value = 0.0;
};

struct EstimateOptions {
    double tail_fraction = 0.25;
    int max_points = 1000;  // trace length cap; n_max is always included
    int threads = 1;
};

struct SubadditiveEstimate {
    Mode mode = Mode::forward;
    double C_hat = 0.0;
    std::vector<TracePoint> trace;
    std::int64_t n_max = 0;
    std::uint64_t seed = 0;
    std::string tag;
};

// n values visited by estimate: every n up to max_points, else an even grid.
std::vector<std::int64_t> trace_grid(std::int64_t n_max, int max_points);
// Median over trace points with n >= (1 - fraction) n_max; −∞ anywhere in
// that tail gives −∞.
double tail_median(const std::vector<TracePoint>& trace, double fraction);

// forward f_{0→n}/n, backward f_{−n→0}/n, window f_{n→2n}/n,
// balanced f_{−n→n}/(2n). Throws std::invalid_argument if n_max < 8.
SubadditiveEstimate estimate(const SubadditiveProcess& proc, const BasePoint& w, Mode mode, std::int64_t n_max,
                             const EstimateOptions& opt = {});

struct SubadditivityReport {
    int samples = 0;
    double worst_violation = 0.0;  // max of f_{a→b} − f_{a→c} − f_{c→b}
    std::int64_t a = 0, c = 0, b = 0;
    bool pass = true;
};
// Random ω from the base measure and a < c < b in [−span, span].
SubadditivityReport check_subadditivity(const SubadditiveProcess& proc, const BaseSystem& base, int samples,
                                        std::uint64_t seed, std::int64_t span = 64);

SubadditiveProcess log_norm_process(const CocycleSystem& c);
// log ‖Λ^k L_{a→b}‖_2 = log σ_1 + ... + log σ_k
SubadditiveProcess log_compound_process(const CocycleSystem& c, int k);
// log ρ_k(L_{a→b}) in the ambient norm
SubadditiveProcess log_bernstein_process(const CocycleSystem& c, int k, Method method = Method::automatic,
                                         const GrassBudget& budget = {});
// Birkhoff sums Σ_{a≤i<b} g(σ^i ω)
SubadditiveProcess additive_process(const BaseSystem& base, std::function<double(const BasePoint&)> g,
                                    std::string tag = "additive");

struct SpectrumReport {
    Mode mode = Mode::balanced;
    std::int64_t n_max = 0;
    std::vector<double> mu;  // μ_1 >= ... >= μ_{k_max}
    std::vector<double> lambda;
    std::vector<int> multiplicity;
    double nu_hat = 0.0;
    bool nu_truncated = true;
    int above_nu = 0;  // μ entries above nu_hat + gap_threshold
    double gap_threshold = 0.1;
    bool monotone = true;
    double worst_monotonicity_violation = 0.0;
    std::vector<SubadditiveEstimate> cumulative;      // traces of log σ_1 + ... + log σ_k
    std::vector<std::vector<TracePoint>> mu_traces;  // consecutive differences
};

// Groups the non-increasing μ into runs whose consecutive gaps are below
// the threshold; λ_i is the first entry of run i.
void cluster_exponents(const std::vector<double>& mu, double gap, std::vector<double>& lambda,
                       std::vector<int>& multiplicity);

struct SpectrumOptions {
    int k_max = 0;  // 0 means d
    std::int64_t n_max = 1000;
    Mode mode = Mode::balanced;
    double gap_threshold = 0.1;
    EstimateOptions estimate;
};

SpectrumReport lyapunov_spectrum(const CocycleSystem& c, const BasePoint& w, const SpectrumOptions& opt);

}  // namespace metlab
