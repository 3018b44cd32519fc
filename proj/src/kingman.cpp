#include "metlab/kingman.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

namespace metlab {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::forward: return "forward";
        case Mode::backward: return "backward";
        case Mode::window: return "window";
        case Mode::balanced: return "balanced";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : kAllModes)
        if (to_string(m) == s) return m;
    throw std::invalid_argument("unknown estimator mode: " + s);
}

std::vector<std::int64_t> trace_grid(std::int64_t n_max, int max_points) {
    std::vector<std::int64_t> ns;
    if (max_points < 2 || n_max <= max_points) {
        for (std::int64_t n = 1; n <= n_max; ++n) ns.push_back(n);
        return ns;
    }
    for (int i = 1; i <= max_points; ++i) {
        auto n = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * n_max / max_points));
        if (ns.empty() || n > ns.back()) ns.push_back(n);
    }
    return ns;
}

double tail_median(const std::vector<TracePoint>& trace, double fraction) {
    if (trace.empty()) throw std::invalid_argument("tail_median: empty trace");
    std::int64_t n_max = trace.back().n;
    double cut = (1.0 - fraction) * static_cast<double>(n_max);
    std::vector<double> tail;
    for (const auto& p : trace)
        if (static_cast<double>(p.n) >= cut) tail.push_back(p.value);
    if (tail.empty()) tail.push_back(trace.back().value);
    for (double v : tail)
        if (v == kNegInf) return kNegInf;
    std::sort(tail.begin(), tail.end());
    std::size_t m = tail.size();
    return m % 2 ? tail[m / 2] : 0.5 * (tail[m / 2 - 1] + tail[m / 2]);
}

namespace {

double mode_value(const SubadditiveProcess& proc, const BasePoint& w, Mode mode, std::int64_t n) {
    switch (mode) {
        case Mode::forward: return proc(w, 0, n) / static_cast<double>(n);
        case Mode::backward: return proc(w, -n, 0) / static_cast<double>(n);
        case Mode::window: return proc(w, n, 2 * n) / static_cast<double>(n);
        case Mode::balanced: return proc(w, -n, n) / static_cast<double>(2 * n);
    }
    return 0.0;
}

}  // namespace

SubadditiveEstimate estimate(const SubadditiveProcess& proc, const BasePoint& w, Mode mode, std::int64_t n_max,
                             const EstimateOptions& opt) {
    if (n_max < 8) throw std::invalid_argument("estimate: n_max must be >= 8");
    if (!(opt.tail_fraction > 0.0 && opt.tail_fraction <= 1.0))
        throw std::invalid_argument("estimate: tail_fraction must lie in (0,1]");
    SubadditiveEstimate e;
    e.mode = mode;
    e.n_max = n_max;
    e.tag = proc.tag;
    for (std::int64_t n : trace_grid(n_max, opt.max_points)) {
        double v = mode_value(proc, w, mode, n);
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw std::runtime_error("estimate: process returned " + std::to_string(v) + " at n=" + std::to_string(n));
        e.trace.push_back({n, v});
    }
    e.C_hat = tail_median(e.trace, opt.tail_fraction);
    return e;
}

SubadditivityReport check_subadditivity(const SubadditiveProcess& proc, const BaseSystem& base, int samples,
                                        std::uint64_t seed, std::int64_t span) {
    if (span < 1) throw std::invalid_argument("check_subadditivity: span must be >= 1");
    SubadditivityReport r;
    r.samples = samples;
    r.worst_violation = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> pick(-span, span);
    for (int i = 0; i < samples; ++i) {
        BasePoint w = base.sample(seed, static_cast<std::uint64_t>(i));
        std::int64_t t[3];
        do {
            for (auto& x : t) x = pick(rng);
            std::sort(t, t + 3);
        } while (t[0] == t[1] || t[1] == t[2]);
        double whole = proc(w, t[0], t[2]);
        double left = proc(w, t[0], t[1]);
        double right = proc(w, t[1], t[2]);
        double violation;
        if (whole == kNegInf) violation = kNegInf;
        else if (left == kNegInf || right == kNegInf) violation = std::numeric_limits<double>::infinity();
        else violation = whole - left - right;
        if (violation > r.worst_violation) {
            r.worst_violation = violation;
            r.a = t[0];
            r.c = t[1];
            r.b = t[2];
        }
    }
    r.pass = !(r.worst_violation > kTauNum);
    return r;
}

SubadditiveProcess log_norm_process(const CocycleSystem& c) {
    return {[c](const BasePoint& w, std::int64_t a, std::int64_t b) { return c.log_norm(w, a, b); },
            "log-norm(" + c.norm().name() + ")"};
}

SubadditiveProcess log_compound_process(const CocycleSystem& c, int k) {
    if (k < 1 || k > c.dim()) throw std::invalid_argument("log_compound_process: k out of range");
    return {[c, k](const BasePoint& w, std::int64_t a, std::int64_t b) { return c.log_sv_sum(w, a, b, k); },
            "log-compound-" + std::to_string(k)};
}

SubadditiveProcess log_bernstein_process(const CocycleSystem& c, int k, Method method, const GrassBudget& budget) {
    if (k < 1 || k > c.dim()) throw std::invalid_argument("log_bernstein_process: k out of range");
    return {[c, k, method, budget](const BasePoint& w, std::int64_t a, std::int64_t b) {
                ScaledMatrix s = c.evaluate_interval(w, a, b);
                if (s.is_zero()) return kNegInf;
                double r = bernstein(s.m, k, c.norm(), method, budget).value;
                return r > 0.0 ? s.log_scale + std::log(r) : kNegInf;
            },
            "log-bernstein-" + std::to_string(k)};
}

SubadditiveProcess additive_process(const BaseSystem& base, std::function<double(const BasePoint&)> g,
                                    std::string tag) {
    return {[base, g](const BasePoint& w, std::int64_t a, std::int64_t b) {
                double s = 0.0;
                for (std::int64_t i = a; i < b; ++i) s += g(base.orbit(w, i));
                return s;
            },
            std::move(tag)};
}

void cluster_exponents(const std::vector<double>& mu, double gap, std::vector<double>& lambda,
                       std::vector<int>& multiplicity) {
    lambda.clear();
    multiplicity.clear();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        bool joins = false;
        if (i > 0) {
            double prev = mu[i - 1];
            joins = (prev == kNegInf && mu[i] == kNegInf) || (prev != kNegInf && prev - mu[i] < gap);
        }
        if (joins) {
            ++multiplicity.back();
        } else {
            lambda.push_back(mu[i]);
            multiplicity.push_back(1);
        }
    }
}

SpectrumReport lyapunov_spectrum(const CocycleSystem& c, const BasePoint& w, const SpectrumOptions& opt) {
    const int d = c.dim();
    const int k_max = opt.k_max == 0 ? d : opt.k_max;
    if (k_max < 1 || k_max > d) throw std::invalid_argument("lyapunov_spectrum: need 1 <= k_max <= d");
    SpectrumReport r;
    r.mode = opt.mode;
    r.n_max = opt.n_max;
    r.gap_threshold = opt.gap_threshold;
    r.cumulative.resize(k_max);

    auto run = [&](int k) { return estimate(log_compound_process(c, k), w, opt.mode, opt.n_max, opt.estimate); };
    if (opt.estimate.threads > 1) {
        std::vector<std::future<SubadditiveEstimate>> jobs;
        for (int k = 1; k <= k_max; ++k) jobs.push_back(std::async(std::launch::async, run, k));
        for (int k = 1; k <= k_max; ++k) r.cumulative[k - 1] = jobs[k - 1].get();
    } else {
        for (int k = 1; k <= k_max; ++k) r.cumulative[k - 1] = run(k);
    }

    const std::size_t len = r.cumulative[0].trace.size();
    r.mu_traces.assign(k_max, std::vector<TracePoint>(len));
    for (int k = 0; k < k_max; ++k) {
        for (std::size_t i = 0; i < len; ++i) {
            double F = r.cumulative[k].trace[i].value;
            double prev = k == 0 ? 0.0 : r.cumulative[k - 1].trace[i].value;
            double v = (F == kNegInf || prev == kNegInf) ? kNegInf : F - prev;
            r.mu_traces[k][i] = {r.cumulative[k].trace[i].n, v};
        }
        r.mu.push_back(tail_median(r.mu_traces[k], opt.estimate.tail_fraction));
    }

    for (int k = 1; k < k_max; ++k) {
        for (std::size_t i = 0; i < len; ++i) {
            double up = r.mu_traces[k - 1][i].value, down = r.mu_traces[k][i].value;
            if (down == kNegInf) continue;
            double v = down - up;
            if (up == kNegInf) v = std::numeric_limits<double>::infinity();
            r.worst_monotonicity_violation = std::max(r.worst_monotonicity_violation, v);
        }
        if (r.mu[k] != kNegInf)
            r.worst_monotonicity_violation = std::max(r.worst_monotonicity_violation, r.mu[k] - r.mu[k - 1]);
    }
    r.monotone = r.worst_monotonicity_violation <= 2 * kTauOpt;

    cluster_exponents(r.mu, opt.gap_threshold, r.lambda, r.multiplicity);
    r.nu_hat = r.mu.back();
    r.nu_truncated = true;
    for (double m : r.mu)
        if (r.nu_hat == kNegInf ? m != kNegInf : m > r.nu_hat + opt.gap_threshold) ++r.above_nu;
    return r;
}

}  // namespace metlab
