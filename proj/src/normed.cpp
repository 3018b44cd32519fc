#include "metlab/normed.hpp"

#include "metlab/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace metlab {

NormSpec NormSpec::weighted(double p, Vec w) {
    NormSpec n{Kind::WeightedLp, p, std::move(w)};
    n.validate(n.weights.size());
    return n;
}

void NormSpec::validate(Eigen::Index d) const {
    if (kind != Kind::WeightedLp) return;
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("WeightedLp needs finite p >= 1");
    if (weights.size() != d) throw std::invalid_argument("WeightedLp weight count does not match dimension");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("WeightedLp weights must be positive");
}

std::string NormSpec::name() const {
    switch (kind) {
        case Kind::L1: return "L1";
        case Kind::L2: return "L2";
        case Kind::Linf: return "Linf";
        case Kind::WeightedLp: return "WeightedLp";
    }
    return "?";
}

bool NormSpec::operator==(const NormSpec& o) const {
    if (kind != o.kind) return false;
    if (kind != Kind::WeightedLp) return true;
    return p == o.p && weights.size() == o.weights.size() && weights == o.weights;
}

double norm(const Vec& x, const NormSpec& n) {
    switch (n.kind) {
        case NormSpec::Kind::L1: return x.cwiseAbs().sum();
        case NormSpec::Kind::L2: return x.norm();
        case NormSpec::Kind::Linf: return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
        case NormSpec::Kind::WeightedLp: {
            if (n.weights.size() != x.size()) throw std::invalid_argument("norm: dimension mismatch");
            if (n.p == 1.0) return n.weights.cwiseProduct(x.cwiseAbs()).sum();
            // factor out the largest entry so high p does not overflow
            double m = x.cwiseAbs().maxCoeff();
            if (m == 0.0) return 0.0;
            double s = 0.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) s += n.weights[i] * std::pow(std::abs(x[i]) / m, n.p);
            return m * std::pow(s, 1.0 / n.p);
        }
    }
    return 0.0;
}

Mat orthonormalize(const Mat& B, double rank_tol) {
    if (B.cols() == 0) return Mat(B.rows(), 0);
    Eigen::ColPivHouseholderQR<Mat> qr(B);
    double top = qr.matrixQR().rows() ? std::abs(qr.matrixQR()(0, 0)) : 0.0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < std::min(B.rows(), B.cols()); ++i)
        if (std::abs(qr.matrixQR()(i, i)) > rank_tol * top && top > 0.0) ++r;
    Mat Q = qr.householderQ() * Mat::Identity(B.rows(), r);
    return Q;
}

namespace {

std::vector<int> primes(std::size_t count) {
    std::vector<int> out;
    for (int c = 2; out.size() < count; ++c) {
        bool prime = true;
        for (int p : out) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) out.push_back(c);
    }
    return out;
}

}  // namespace

Vec halton(std::size_t index, Eigen::Index dim) {
    static const std::vector<int> P = primes(256);
    if (static_cast<std::size_t>(dim) > P.size()) throw std::invalid_argument("halton: dimension too large");
    Vec h(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        double f = 1.0, r = 0.0;
        std::size_t i = index;
        const int b = P[j];
        while (i > 0) {
            f /= b;
            r += f * static_cast<double>(i % b);
            i /= b;
        }
        h[j] = r;
    }
    return h;
}

ExtremeResult sphere_extremize(const SphereFn& f, const Mat& basis, const NormSpec& n, Extremum mode,
                               const Budget& budget, const std::vector<Vec>& extra_starts) {
    const Eigen::Index k = basis.cols();
    if (k == 0) throw std::invalid_argument("sphere_extremize: zero-dimensional subspace");
    const double sign = mode == Extremum::max ? -1.0 : 1.0;
    int evals = 0;

    auto point = [&](const Vec& u) -> Vec {
        Vec x = basis * u;
        return x / norm(x, n);
    };
    auto obj = [&](const Vec& u) {
        ++evals;
        return sign * f(point(u));
    };

    if (k == 1) {
        Vec up = Vec::Ones(1), um = -Vec::Ones(1);
        double a = obj(up), b = obj(um);
        if (b < a) return {sign * b, point(um)};
        return {sign * a, point(up)};
    }

    std::vector<Vec> seeds;
    for (const Vec& s : extra_starts)
        if (s.size() == k && s.norm() > 0.0) seeds.push_back(s.normalized());
    for (Eigen::Index i = 0; i < k; ++i) {
        seeds.push_back(Vec::Unit(k, i));
        seeds.push_back(-Vec::Unit(k, i));
    }
    const int halton_count = budget.starts > 0 ? budget.starts : static_cast<int>(64 * k);
    for (int i = 1; static_cast<int>(seeds.size()) < halton_count + 2 * k + static_cast<int>(extra_starts.size());
         ++i) {
        Vec u = 2.0 * halton(static_cast<std::size_t>(i), k).array() - 1.0;
        if (u.norm() < 1e-3) continue;
        seeds.push_back(u.normalized());
    }

    std::vector<double> vals(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) vals[i] = obj(seeds[i]);
    std::vector<std::size_t> order(seeds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

    Vec best_u = seeds[order[0]];
    double best = vals[order[0]];
    const int refine = std::max(1, std::min<int>(budget.refine, static_cast<int>(seeds.size())));

    for (int r = 0; r < refine; ++r) {
        Vec u = seeds[order[r]];
        double fu = vals[order[r]];
        const double h0 = 0.25;
        double h = h0;
        while (h > budget.tol && evals < budget.max_evals) {
            bool moved = false;
            for (Eigen::Index i = 0; i < k && !moved; ++i) {
                for (double s : {1.0, -1.0}) {
                    Vec v = u;
                    v[i] += s * h;
                    v.normalize();
                    double fv = obj(v);
                    if (fv < fu) {
                        u = v;
                        fu = fv;
                        moved = true;
                        break;
                    }
                }
            }
            for (Eigen::Index i = 0; i < k && !moved; ++i) {
                for (Eigen::Index j = i + 1; j < k && !moved; ++j) {
                    for (double si : {1.0, -1.0}) {
                        for (double sj : {1.0, -1.0}) {
                            Vec v = u;
                            v[i] += si * h;
                            v[j] += sj * h;
                            v.normalize();
                            double fv = obj(v);
                            if (fv < fu) {
                                u = v;
                                fu = fv;
                                moved = true;
                                break;
                            }
                        }
                        if (moved) break;
                    }
                }
            }
            h = moved ? std::min(2.0 * h, h0) : 0.5 * h;
        }
        if (fu < best) {
            best = fu;
            best_u = u;
        }
    }
    return {sign * best, point(best_u)};
}

std::optional<Polyhedral> polyhedral(const NormSpec& n, Eigen::Index d) {
    switch (n.kind) {
        case NormSpec::Kind::L1: return Polyhedral{true, Vec::Ones(d)};
        case NormSpec::Kind::Linf: return Polyhedral{false, Vec::Ones(d)};
        case NormSpec::Kind::WeightedLp:
            if (n.p == 1.0) return Polyhedral{true, n.weights};
            return std::nullopt;
        case NormSpec::Kind::L2: return std::nullopt;
    }
    return std::nullopt;
}

namespace {

// Visits every subset of {0..d-1} of the given size in lexicographic order.
template <class F>
void for_each_subset(int d, int size, F&& fn) {
    if (size < 0 || size > d) return;
    std::vector<int> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        int i = size - 1;
        while (i >= 0 && idx[i] == d - size + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

bool small_enough_for_vertices(const Polyhedral& poly, Eigen::Index d, Eigen::Index m) {
    if (poly.l1) return d <= 14;
    return binomial(static_cast<int>(d), static_cast<int>(m)) * std::pow(2.0, static_cast<double>(m)) <= 20000.0;
}

}  // namespace

std::vector<Vec> polytope_vertices(const Mat& M, const Polyhedral& poly) {
    const int d = static_cast<int>(M.rows());
    const int m = static_cast<int>(M.cols());
    Mat A = poly.scale.asDiagonal() * M;
    std::vector<Vec> out;
    if (m == 0) return out;
    const double scale = A.cwiseAbs().maxCoeff();
    if (scale == 0.0) return out;

    if (!poly.l1) {
        for_each_subset(d, m, [&](const std::vector<int>& rows) {
            Mat S(m, m);
            for (int i = 0; i < m; ++i) S.row(i) = A.row(rows[i]);
            Eigen::FullPivLU<Mat> lu(S);
            lu.setThreshold(1e-12);
            if (lu.rank() < m) return;
            instrument::note_inversion();
            for (long mask = 0; mask < (1L << m); ++mask) {
                Vec s(m);
                for (int i = 0; i < m; ++i) s[i] = (mask >> i) & 1 ? -1.0 : 1.0;
                Vec u = lu.solve(s);
                if ((A * u).cwiseAbs().maxCoeff() <= 1.0 + 1e-9) out.push_back(u);
            }
        });
        return out;
    }

    // L1: a vertex is the unique (up to scale) u whose image vanishes on a
    // zero set Z, so enumerate Z with a one-dimensional null space.
    for (int z = 0; z <= d - 1; ++z) {
        for_each_subset(d, z, [&](const std::vector<int>& rows) {
            Vec u;
            if (z == 0) {
                if (m != 1) return;
                u = Vec::Ones(1);
            } else {
                Mat N(z, m);
                for (int i = 0; i < z; ++i) N.row(i) = A.row(rows[i]);
                Eigen::JacobiSVD<Mat> svd(N, Eigen::ComputeFullV);
                const auto& sv = svd.singularValues();
                int rank = 0;
                for (Eigen::Index i = 0; i < sv.size(); ++i)
                    if (sv[i] > 1e-12 * scale) ++rank;
                if (m - rank != 1) return;
                u = svd.matrixV().col(m - 1);
            }
            double s = (A * u).cwiseAbs().sum();
            if (s <= 1e-300) return;
            out.push_back(u / s);
            out.push_back(-u / s);
        });
    }
    return out;
}

RatioResult ratio_sup(const Mat& T, const Mat& B, const NormSpec& n, const Budget& budget) {
    Mat Q = orthonormalize(B);
    RatioResult res;
    if (Q.cols() == 0) {
        res.witness = Vec::Zero(T.cols());
        return res;
    }
    if (n.kind == NormSpec::Kind::L2) {
        Eigen::JacobiSVD<Mat> svd(T * Q, Eigen::ComputeFullV);
        res.value = svd.singularValues()[0];
        res.witness = Q * svd.matrixV().col(0);
        return res;
    }
    auto poly = polyhedral(n, T.cols());
    if (poly && small_enough_for_vertices(*poly, T.cols(), Q.cols())) {
        double best = -1.0;
        for (const Vec& u : polytope_vertices(Q, *poly)) {
            Vec x = Q * u;
            double nx = norm(x, n);
            if (nx <= 0.0) continue;
            double v = norm(T * x, n) / nx;
            if (v > best) {
                best = v;
                res.witness = x / nx;
            }
        }
        res.value = best;
        return res;
    }
    auto r = sphere_extremize([&](const Vec& x) { return norm(T * x, n); }, Q, n, Extremum::max, budget);
    res.value = r.value;
    res.witness = r.argpoint;
    res.exact = false;
    return res;
}

RatioResult ratio_inf(const Mat& T, const Mat& B, const NormSpec& n, const Budget& budget) {
    Mat Q = orthonormalize(B);
    RatioResult res;
    if (Q.cols() == 0) {
        res.witness = Vec::Zero(T.cols());
        return res;
    }
    Mat M = T * Q;
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    const Eigen::Index k = Q.cols();
    const double smin = M.rows() >= k ? svd.singularValues()[k - 1] : 0.0;
    if (n.kind == NormSpec::Kind::L2) {
        res.value = smin;
        res.witness = Q * svd.matrixV().col(k - 1);
        return res;
    }
    auto poly = polyhedral(n, T.cols());
    if (poly && small_enough_for_vertices(*poly, T.cols(), k)) {
        const double smax = svd.singularValues()[0];
        if (smax == 0.0 || smin <= 1e-15 * smax) {
            Vec x = Q * svd.matrixV().col(k - 1);
            res.value = 0.0;
            res.witness = x / norm(x, n);
            return res;
        }
        double best = -1.0;
        for (const Vec& u : polytope_vertices(M, *poly)) {
            Vec x = Q * u;
            double nx = norm(x, n);
            double nt = norm(M * u, n);
            if (nt <= 0.0) continue;
            double v = nx / nt;
            if (v > best) {
                best = v;
                res.witness = x / nx;
            }
        }
        res.value = best > 0.0 ? 1.0 / best : 0.0;
        return res;
    }
    auto r = sphere_extremize([&](const Vec& x) { return norm(T * x, n); }, Q, n, Extremum::min, budget,
                              {svd.matrixV().col(k - 1)});
    res.value = r.value;
    res.witness = r.argpoint;
    res.exact = false;
    return res;
}

double operator_norm(const Mat& T, const NormSpec& n) {
    switch (n.kind) {
        case NormSpec::Kind::L1: return T.cwiseAbs().colwise().sum().maxCoeff();
        case NormSpec::Kind::Linf: return T.cwiseAbs().rowwise().sum().maxCoeff();
        case NormSpec::Kind::L2: {
            Eigen::JacobiSVD<Mat> svd(T);
            return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
        }
        case NormSpec::Kind::WeightedLp:
            n.validate(T.cols());
            if (n.p == 1.0) {
                double best = 0.0;
                for (Eigen::Index j = 0; j < T.cols(); ++j)
                    best = std::max(best, n.weights.cwiseProduct(T.col(j).cwiseAbs()).sum() / n.weights[j]);
                return best;
            }
            return ratio_sup(T, Mat::Identity(T.cols(), T.cols()), n).value;
    }
    return 0.0;
}

double operator_norm(const Operator& T) {
    if (T.domain == T.codomain) return operator_norm(T.entries, T.domain);
    const Eigen::Index d = T.entries.cols();
    T.domain.validate(d);
    T.codomain.validate(T.entries.rows());
    if (auto poly = polyhedral(T.domain, d); poly && small_enough_for_vertices(*poly, d, d)) {
        double best = 0.0;
        for (const Vec& u : polytope_vertices(Mat::Identity(d, d), *poly))
            best = std::max(best, norm(T.entries * u, T.codomain) / norm(u, T.domain));
        return best;
    }
    return sphere_extremize([&](const Vec& x) { return norm(T.entries * x, T.codomain); },
                            Mat::Identity(d, d), T.domain, Extremum::max)
        .value;
}

}  // namespace metlab
