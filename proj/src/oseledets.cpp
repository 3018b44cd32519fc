#include "metlab/oseledets.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

namespace metlab {

std::string to_string(Selection s) { return s == Selection::enumerated ? "enumerated" : "optimized"; }

double fitted_slope(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) return kNaN;
    double mx = 0, my = 0;
    for (auto& [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxy = 0, sxx = 0;
    for (auto& [x, y] : xy) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxx > 0 ? sxy / sxx : kNaN;
}

namespace {

FastSpaceRecord fast_record(const CocycleSystem& c, const BasePoint& w, int m1, double eps, std::int64_t n,
                            const FastSpaceOptions& opt, int& retries) {
    const auto d = static_cast<Eigen::Index>(c.dim());
    ScaledMatrix big = c.evaluate_interval(w, -n, n);
    if (big.is_zero()) throw DimensionCollapse("fast_space: L_{-n->n} vanished");
    ScaledMatrix back = c.evaluate_interval(w, -n, 0);
    FastSpaceRecord rec;
    rec.n = n;
    Method method = c.norm().kind == NormSpec::Kind::L2 ? Method::closed_form : Method::optimized;
    GrowthReport rho = bernstein(big.m, m1, c.norm(), method, opt.budget);
    if (!(rho.value > 0.0)) throw DimensionCollapse("fast_space: ρ_m vanished");
    rec.log_rho = big.log_scale + std::log(rho.value);

    if (opt.selection == Selection::optimized) {
        rec.pre = rho.witness;
        rec.E = push_forward(back.m, rec.pre);
        rec.log_growth = big.log_scale + std::log(min_growth(big.m, rec.pre, c.norm(), opt.budget.sphere));
        return rec;
    }

    const double threshold = std::exp(-eps) * rho.value;
    DenseEnumeration stream(d, m1);
    for (std::uint64_t i = 1; i <= opt.max_index; ++i) {
        Subspace V = stream(i);
        double g = min_growth(big.m, V, c.norm(), opt.budget.sphere);
        if (!(g > threshold)) continue;
        try {
            rec.E = push_forward(back.m, V);
        } catch (const DimensionCollapse&) {
            ++retries;
            continue;
        }
        rec.pre = V;
        rec.index = i;
        rec.log_growth = big.log_scale + std::log(g);
        return rec;
    }
    throw Exhausted("fast_space: no enumerated subspace met the growth threshold");
}

void check_fast_args(const CocycleSystem& c, int m1, double eps) {
    if (m1 < 1 || m1 > c.dim()) throw std::invalid_argument("fast_space: need 1 <= m1 <= d");
    if (!(eps > 0.0)) throw std::invalid_argument("fast_space: eps must be positive");
}

}  // namespace

Subspace fast_space_at(const CocycleSystem& c, const BasePoint& w, int m1, double eps, std::int64_t n,
                       const FastSpaceOptions& opt) {
    check_fast_args(c, m1, eps);
    int retries = 0;
    return fast_record(c, w, m1, eps, n, opt, retries).E;
}

FastSpaceRun fast_space(const CocycleSystem& c, const BasePoint& w, int m1, double eps, const FastSpaceOptions& opt) {
    check_fast_args(c, m1, eps);
    if (opt.n_min < 1 || opt.n_max < opt.n_min) throw std::invalid_argument("fast_space: bad n range");
    FastSpaceRun run;
    run.m1 = m1;
    run.eps = eps;
    for (std::int64_t n = opt.n_min; n <= opt.n_max; ++n) {
        run.records.push_back(fast_record(c, w, m1, eps, n, opt, run.retries));
        if (run.records.size() < 2) continue;
        auto& prev = run.records[run.records.size() - 2];
        prev.gap = m1 == c.dim() ? 0.0 : hausdorff_distance(prev.E, run.records.back().E, c.norm(), opt.budget.sphere);
        if (prev.gap < opt.stop_tol) {
            run.converged = true;
            break;
        }
    }
    run.E_final = run.records.back().E;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : run.records)
        if (r.gap > 1e-15) pts.emplace_back(static_cast<double>(r.n), std::log(r.gap));
    run.slope = fitted_slope(pts);
    return run;
}

double equivariance_residual(const CocycleSystem& c, const BasePoint& w, const SubspaceField& E) {
    Subspace here = E(w);
    Subspace there = E(c.base().orbit(w, 1));
    return hausdorff_distance(push_forward(c.at(w), here), there, c.norm());
}

namespace {

// Translate x_j − e (e ∈ E) minimizing ‖M y‖/‖y‖, scaled so the x_j
// coefficient is one. B = [x_j, basis(E)] is Euclidean-orthonormal.
Vec slowest_translate(const Mat& M, const Mat& B, const NormSpec& n, const Budget& budget) {
    Vec v;
    if (n.kind == NormSpec::Kind::L2) {
        Eigen::JacobiSVD<Mat> svd(M * B, Eigen::ComputeFullV);
        v = svd.matrixV().col(B.cols() - 1);
    } else {
        RatioResult r = ratio_inf(M, B, n, budget);
        v = B.transpose() * r.witness;
    }
    if (std::abs(v(0)) < 1e-12 * v.norm()) return B.col(0);
    return B * (v / v(0));
}

// Dyadic grid in R^m ordered by level, then lexicographically; only points
// new at their level are listed.
class CoefficientGrid {
public:
    CoefficientGrid(int m, long R) : m_(m), R_(R) {}

    // visits points until fn returns true or budget is spent
    template <class F>
    std::uint64_t scan(std::uint64_t budget, F&& fn) const {
        std::uint64_t index = 0;
        for (int level = 0; level <= 30; ++level) {
            const long span = R_ << level;  // numerators in [-span, span]
            std::vector<long> num(m_, -span);
            while (true) {
                bool fresh = level == 0;
                for (long v : num)
                    if (v % 2 != 0) fresh = true;
                if (fresh) {
                    ++index;
                    std::vector<double> q(m_);
                    for (int i = 0; i < m_; ++i) q[i] = std::ldexp(static_cast<double>(num[i]), -level);
                    if (fn(q, index)) return index;
                    if (index >= budget) return 0;
                }
                int i = m_ - 1;
                while (i >= 0 && num[i] == span) num[i--] = -span;
                if (i < 0) break;
                ++num[i];
            }
        }
        return 0;
    }

private:
    int m_;
    long R_;
};

}  // namespace

SlowProjectionRun slow_projection(const CocycleSystem& c, const BasePoint& w, const Subspace& E, double eps,
                                  const SlowProjectionOptions& opt) {
    const auto d = static_cast<Eigen::Index>(c.dim());
    if (E.ambient_dim() != d || E.dim() < 1) throw std::invalid_argument("slow_projection: E must be a subspace of R^d");
    if (opt.n_min < 1 || opt.n_max < opt.n_min) throw std::invalid_argument("slow_projection: bad n range");
    const auto m = E.dim();
    SlowProjectionRun run;
    if (m == d) {
        run.Pi_final = {Mat::Zero(d, d), Subspace(), E};
        run.converged = true;
        return run;
    }
    const Mat Qp = euclidean_complement(E).basis();
    const auto r = Qp.cols();
    std::vector<Vec> basis_E;
    if (opt.grid_check) basis_E = measurable_basis(E, c.norm());

    Mat Y(d, r);
    for (std::int64_t n = opt.n_min; n <= opt.n_max; ++n) {
        ScaledMatrix M = c.evaluate_interval(w, 0, n);
        for (Eigen::Index j = 0; j < r; ++j) {
            Mat B(d, m + 1);
            B << Qp.col(j), E.basis();
            Y.col(j) = slowest_translate(M.m, B, c.norm(), opt.sphere);
        }
        SlowRecord rec{n, Y * Qp.transpose(), kNaN};
        if (!run.records.empty()) rec.iterate_gap = operator_norm(rec.Pi - run.records.back().Pi, c.norm());
        run.records.push_back(rec);

        if (opt.grid_check && n <= opt.grid_n_max && !M.is_zero()) {
            Method method = c.norm().kind == NormSpec::Kind::L2 ? Method::closed_form : Method::optimized;
            double rho = bernstein(M.m, static_cast<int>(m) + 1, c.norm(), method).value;
            const double bound = std::exp(eps) * rho;
            Mat Bq(d, m);
            for (Eigen::Index i = 0; i < m; ++i) Bq.col(i) = basis_E[i];
            Eigen::JacobiSVD<Mat> sv(E.basis().transpose() * Bq);
            const double smin = sv.singularValues()(m - 1);
            for (Eigen::Index j = 0; j < r; ++j) {
                GridCheck g;
                g.n = n;
                g.column = static_cast<int>(j);
                const Vec x = Qp.col(j);
                const Vec y = Y.col(j);
                auto ok = [&](const Vec& t) { return norm(M.m * t, c.norm()) <= bound * norm(t, c.norm()); };
                g.continuous_ok = ok(y);
                long R = static_cast<long>(std::ceil((x - y).norm() / smin)) + 1;
                CoefficientGrid grid(static_cast<int>(m), R);
                Vec hit;
                g.index = grid.scan(opt.grid_budget, [&](const std::vector<double>& q, std::uint64_t) {
                    Vec t = x;
                    for (Eigen::Index i = 0; i < m; ++i) t -= q[i] * Bq.col(i);
                    if (!ok(t)) return false;
                    g.q = q;
                    hit = t;
                    return true;
                });
                g.found = g.index > 0;
                if (g.found) g.distance = (hit - y).norm();
                run.grid.push_back(g);
            }
        }
        if (rec.iterate_gap < opt.stop_tol) {
            run.converged = true;
            break;
        }
    }
    const Mat& P = run.records.back().Pi;
    run.Pi_final = {P, Subspace::span(Y), E};
    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : run.records)
        if (rec.iterate_gap > 1e-15) pts.emplace_back(static_cast<double>(rec.n), std::log(rec.iterate_gap));
    run.slope = fitted_slope(pts);
    return run;
}

GrowthTrace vector_growth(const CocycleSystem& c, const BasePoint& w, const Vec& x, std::int64_t n_max,
                          double fit_from) {
    if (n_max < 1) throw std::invalid_argument("vector_growth: n_max must be >= 1");
    if (x.size() != c.dim()) throw std::invalid_argument("vector_growth: dimension mismatch");
    GrowthTrace out;
    double nx = norm(x, c.norm());
    if (nx == 0.0) {
        out.rate = kNegInf;
        return out;
    }
    Vec v = x / nx;
    double acc = 0.0;
    bool dead = false;
    std::vector<std::pair<double, double>> pts;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        if (!dead) {
            Mat L = c.at(c.base().orbit(w, n - 1));
            Vec u = L * v;
            double nu = norm(u, c.norm());
            double scale = operator_norm(L, c.norm());
            if (nu == 0.0 || nu < 1e-14 * scale) {
                dead = true;
            } else {
                acc += std::log(nu);
                v = u / nu;
            }
        }
        double val = dead ? kNegInf : acc / static_cast<double>(n);
        out.trace.push_back({n, val});
        if (!dead && static_cast<double>(n) >= fit_from * static_cast<double>(n_max))
            pts.emplace_back(static_cast<double>(n), acc);
    }
    if (dead) {
        out.rate = kNegInf;
    } else if (pts.size() >= 2) {
        out.rate = fitted_slope(pts);
    } else {
        out.rate = out.trace.back().value;
    }
    return out;
}

double vector_growth_rate(const CocycleSystem& c, const BasePoint& w, const Vec& x, std::int64_t n_max) {
    return vector_growth(c, w, x, n_max).rate;
}

struct ProjectionField::State {
    std::mutex mu;
    std::map<std::pair<std::uint64_t, std::int64_t>, std::pair<Subspace, Mat>> memo;
};

ProjectionField::ProjectionField(CocycleSystem c, int m, double eps, FastSpaceOptions fast,
                                 SlowProjectionOptions slow)
    : c_(std::move(c)), m_(m), eps_(eps), fast_(std::move(fast)), slow_(std::move(slow)),
      state_(std::make_shared<State>()) {
    slow_.grid_check = false;
    check_fast_args(c_, m_, eps_);
}

namespace {

std::pair<Subspace, Mat> compute_field(const CocycleSystem& c, const BasePoint& p, int m, double eps,
                                       const FastSpaceOptions& fast, const SlowProjectionOptions& slow) {
    FastSpaceRun f = fast_space(c, p, m, eps, fast);
    SlowProjectionRun s = slow_projection(c, p, f.E_final, eps, slow);
    return {f.E_final, s.Pi_final.matrix};
}

}  // namespace

Mat ProjectionField::operator()(const BasePoint& w) const {
    auto canon = c_.base().canonical(w);
    auto key = std::make_pair(canon.root_digest, canon.tau);
    {
        std::lock_guard lock(state_->mu);
        auto it = state_->memo.find(key);
        if (it != state_->memo.end()) return it->second.second;
    }
    BasePoint p = canon.root;
    p.t = canon.tau;
    auto value = compute_field(c_, p, m_, eps_, fast_, slow_);
    std::lock_guard lock(state_->mu);
    return state_->memo.insert_or_assign(key, std::move(value)).first->second.second;
}

Subspace ProjectionField::fast(const BasePoint& w) const {
    (*this)(w);
    auto canon = c_.base().canonical(w);
    std::lock_guard lock(state_->mu);
    return state_->memo.at({canon.root_digest, canon.tau}).first;
}

CocycleSystem deflate(const CocycleSystem& c, MatrixField Pi, const DeflateOptions& opt) {
    if (!Pi) throw std::invalid_argument("deflate: empty projection field");
    const NormSpec norm = c.norm();
    auto gen = Generator::custom(c.dim(), [c, Pi, opt, norm](const BaseSystem&, const BasePoint& p) -> Mat {
        Mat L = c.at(p);
        Mat P = Pi(p);
        if (opt.restrict_to_A && operator_norm(P, norm) > opt.bound) return L;
        Mat M = L * P;
        if (opt.rank_tol <= 0.0) return M;
        Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Vec s = svd.singularValues();
        const double cut = opt.rank_tol * operator_norm(L, NormSpec::l2()) * operator_norm(P, NormSpec::l2());
        if (s.size() == 0 || s(s.size() - 1) >= cut) return M;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) < cut) s(i) = 0.0;
        return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    });
    return CocycleSystem(c.base(), std::move(gen), c.norm(), c.seed());
}

std::vector<TracePoint> temperedness_profile(const MatrixField& Pi, const CocycleSystem& c, const BasePoint& w,
                                             const std::vector<std::int64_t>& ns) {
    std::vector<TracePoint> out;
    for (std::int64_t n : ns) {
        if (n < 1) throw std::invalid_argument("temperedness_profile: n must be >= 1");
        double pn = operator_norm(Pi(c.base().orbit(w, n)), c.norm());
        out.push_back({n, pn > 0.0 ? std::log(pn) / static_cast<double>(n) : kNegInf});
    }
    return out;
}

namespace {

// nonzero singular values of a projection are at least 1
int projection_rank(const Mat& P) {
    if (P.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(P);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-3) ++r;
    return r;
}

}  // namespace

Decomposition full_decomposition(const CocycleSystem& c, const BasePoint& w, const DecompositionOptions& opt) {
    const auto d = static_cast<Eigen::Index>(c.dim());
    Decomposition dec;
    dec.spectrum = lyapunov_spectrum(c, w, opt.spectrum);
    const auto& lam = dec.spectrum.lambda;
    const auto& mult = dec.spectrum.multiplicity;
    int finite = 0;
    for (double l : lam)
        if (l != kNegInf) ++finite;
    const int L = opt.L_target > 0 ? std::min(opt.L_target, finite) : finite;
    if (opt.L_target > finite) dec.failure = "fewer finite levels than requested";

    Mat acc = Mat::Identity(d, d);
    std::vector<Mat> accs;  // projection onto V_{l+1} after each level
    Mat fastbasis(d, 0);
    CocycleSystem current = c;
    std::vector<std::shared_ptr<ProjectionField>> fields;
    try {
        for (int l = 0; l < L; ++l) {
            Level lev;
            lev.lambda = lam[l];
            lev.m = mult[l];
            double next = l + 1 < static_cast<int>(lam.size()) ? lam[l + 1] : kNegInf;
            lev.eps = opt.eps_override ? *opt.eps_override : (next == kNegInf ? 0.1 : (lev.lambda - next) / 10.0);

            auto field = std::make_shared<ProjectionField>(current, lev.m, lev.eps, opt.fast, opt.slow);
            lev.fast = fast_space(current, w, lev.m, lev.eps, opt.fast);
            lev.E = lev.fast.E_final;
            lev.slow = slow_projection(current, w, lev.E, lev.eps, opt.slow);
            lev.equivariance =
                equivariance_residual(current, w, [&field](const BasePoint& p) { return field->fast(p); });

            Mat grown(d, fastbasis.cols() + lev.E.dim());
            grown << fastbasis, lev.E.basis();
            fastbasis = grown;
            acc = acc * lev.slow.Pi_final.matrix;
            accs.push_back(acc);

            const std::int64_t n = opt.growth_check_n;
            ScaledMatrix M = c.evaluate_interval(w, 0, n);
            double g = min_growth(M.m, Subspace::span(fastbasis), c.norm());
            lev.growth_lhs = g > 0.0 ? M.log_scale + std::log(g) : kNegInf;
            lev.growth_rhs = static_cast<double>(n) * (lev.lambda - 3.0 * lev.eps);
            lev.growth_ok = lev.growth_lhs >= lev.growth_rhs;

            dec.levels.push_back(std::move(lev));
            fields.push_back(field);
            current = deflate(current, [field](const BasePoint& p) { return (*field)(p); }, opt.deflate);
            dec.deflated.push_back(current);
        }
        dec.complete = dec.failure.empty();
    } catch (const std::exception& e) {
        dec.failure = "level " + std::to_string(dec.levels.size() + 1) + ": " + e.what();
        dec.complete = false;
    }
    dec.fields = fields;

    dec.slow_field = [fields, d](const BasePoint& p) {
        Mat P = Mat::Identity(d, d);
        for (const auto& f : fields) P = P * (*f)(p);
        return P;
    };
    int rank = projection_rank(acc);
    Subspace range = rank > 0 ? Subspace::span(acc) : Subspace();
    Subspace kernel = fastbasis.cols() > 0 ? Subspace::span(fastbasis) : Subspace();
    dec.Pi_slow = {acc, range, kernel};
    dec.idempotency = dec.Pi_slow.idempotency_residual();
    int msum = 0;
    for (const auto& lev : dec.levels) msum += lev.m;
    dec.dimension_audit = msum + rank;

    // vectors of each V_{l+1} grow no faster than λ_{l+1}
    if (dec.complete) {
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> gauss;
        double delta = opt.slow.stop_tol;
        for (std::size_t l = 0; l < accs.size(); ++l) {
            const auto& recs = dec.levels[l].fast.records;
            const double g = recs.empty() ? kNaN : recs.back().gap;
            delta = std::max(delta, std::isfinite(g) ? g : opt.fast.stop_tol);
            if (l + 1 >= lam.size() || lam[l + 1] == kNegInf || projection_rank(accs[l]) == 0) continue;
            // an error δ in the fast spaces is amplified by e^{n(λ_1 − λ_{l+1})}
            const double amp = lam[0] - lam[l + 1];
            const auto horizon = std::clamp<std::int64_t>(
                static_cast<std::int64_t>(std::log(1.0 / delta) / (2.0 * amp)), 8, opt.v_horizon);
            for (int i = 0; i < opt.v_samples; ++i) {
                Vec z(d);
                for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
                Vec x = accs[l] * z;
                if (x.norm() == 0.0) continue;
                ++dec.v_tested;
                if (vector_growth_rate(c, w, x / x.norm(), horizon) > lam[l + 1] + 0.05) ++dec.v_violations;
            }
        }
    }
    if (dec.complete && !fields.empty() && !opt.temperedness_ns.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& tp : temperedness_profile(dec.slow_field, c, w, opt.temperedness_ns))
            if (tp.value != kNegInf) pts.emplace_back(static_cast<double>(tp.n), tp.value * tp.n);
        dec.temperedness_slope = fitted_slope(pts);
    }
    return dec;
}

}  // namespace metlab
