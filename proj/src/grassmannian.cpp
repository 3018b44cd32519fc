#include "metlab/grassmannian.hpp"

#include "metlab/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metlab {

namespace {

Mat canonical_basis(const Mat& Q) {
    const Eigen::Index d = Q.rows(), k = Q.cols();
    Mat P = Q * Q.transpose();
    Eigen::ColPivHouseholderQR<Mat> qr(P);
    Mat B = qr.householderQ() * Mat::Identity(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index i;
        B.col(j).cwiseAbs().maxCoeff(&i);
        if (B(i, j) < 0) B.col(j) *= -1.0;
    }
    return B;
}

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

Budget inner_budget(Eigen::Index k) {
    Budget b;
    b.starts = static_cast<int>(16 * k);
    b.refine = 2;
    b.tol = 1e-9;
    return b;
}

}  // namespace

Subspace Subspace::span(const Mat& vectors, double rank_tol) {
    Mat Q = orthonormalize(vectors, rank_tol);
    if (Q.cols() == 0) throw std::invalid_argument("Subspace::span: empty span");
    return Subspace(canonical_basis(Q));
}

Subspace Subspace::coordinate(Eigen::Index d, const std::vector<int>& axes) {
    Mat B = Mat::Zero(d, static_cast<Eigen::Index>(axes.size()));
    for (std::size_t j = 0; j < axes.size(); ++j) B(axes[j], static_cast<Eigen::Index>(j)) = 1.0;
    return span(B);
}

Subspace Subspace::whole(Eigen::Index d) { return span(Mat::Identity(d, d)); }

bool Subspace::operator==(const Subspace& o) const {
    if (ambient_dim() != o.ambient_dim() || dim() != o.dim()) return false;
    return 2.0 * std::sin(largest_principal_angle(*this, o) / 2.0) < 1e-9;
}

double Projection::idempotency_residual() const { return (matrix * matrix - matrix).norm(); }

double largest_principal_angle(const Subspace& V, const Subspace& W) {
    if (V.ambient_dim() != W.ambient_dim()) throw std::invalid_argument("principal angle: ambient mismatch");
    Mat R = V.basis() - W.basis() * (W.basis().transpose() * V.basis());
    Eigen::JacobiSVD<Mat> svd(R);
    double s = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    return std::asin(std::min(1.0, s));
}

double point_to_sphere_distance(const Vec& x, const Subspace& W, const NormSpec& n, const Budget& budget) {
    const Mat& Q = W.basis();
    if (n.kind == NormSpec::Kind::L2) {
        Vec y = Q * (Q.transpose() * x);
        double ny = y.norm();
        if (ny == 0.0) return std::sqrt(x.squaredNorm() + 1.0);
        return (x - y / ny).norm();
    }
    return sphere_extremize([&](const Vec& w) { return norm(x - w, n); }, Q, n, Extremum::min, budget,
                            {Q.transpose() * x})
        .value;
}

double point_to_subspace_distance(const Vec& x, const Subspace& W, const NormSpec& n) {
    const Mat& Q = W.basis();
    const int d = static_cast<int>(Q.rows()), k = static_cast<int>(Q.cols());
    if (x.size() != d) throw std::invalid_argument("point_to_subspace_distance: dimension mismatch");
    if (n.kind == NormSpec::Kind::L2) return (x - Q * (Q.transpose() * x)).norm();

    auto poly = polyhedral(n, d);
    if (poly) {
        Vec Dx = poly->scale.cwiseProduct(x);
        Mat DQ = poly->scale.asDiagonal() * Q;
        double best = norm(x, n);
        if (poly->l1) {
            // an optimal coefficient vector interpolates k coordinates
            for_each_subset(d, k, [&](const std::vector<int>& rows) {
                Mat S(k, k);
                Vec r(k);
                for (int i = 0; i < k; ++i) {
                    S.row(i) = DQ.row(rows[i]);
                    r[i] = Dx[rows[i]];
                }
                Eigen::FullPivLU<Mat> lu(S);
                if (lu.rank() < k) return;
                instrument::note_inversion();
                Vec c = lu.solve(r);
                best = std::min(best, (Dx - DQ * c).cwiseAbs().sum());
            });
        } else {
            // Chebyshev fit: k+1 residuals of equal size at an optimal vertex
            for_each_subset(d, std::min(d, k + 1), [&](const std::vector<int>& rows) {
                const int m = static_cast<int>(rows.size());
                for (long mask = 0; mask < (1L << m); ++mask) {
                    Mat S(m, k + 1);
                    Vec r(m);
                    for (int i = 0; i < m; ++i) {
                        S.block(i, 0, 1, k) = DQ.row(rows[i]);
                        S(i, k) = (mask >> i) & 1 ? -1.0 : 1.0;
                        r[i] = Dx[rows[i]];
                    }
                    Eigen::FullPivLU<Mat> lu(S);
                    if (lu.rank() < k + 1) continue;
                    instrument::note_inversion();
                    Vec ct = lu.solve(r);
                    if ((S * ct - r).norm() > 1e-9 * (1.0 + r.norm())) continue;
                    best = std::min(best, (Dx - DQ * ct.head(k)).cwiseAbs().maxCoeff());
                }
            });
        }
        return best;
    }
    // convex in the coefficients; pattern search from the least-squares point
    Vec c = Q.transpose() * x;
    double fc = norm(x - Q * c, n);
    const double h0 = std::max(1e-3, fc);
    double h = h0;
    while (h > 1e-12) {
        bool moved = false;
        for (int i = 0; i < k && !moved; ++i) {
            for (double s : {1.0, -1.0}) {
                Vec c2 = c;
                c2[i] += s * h;
                double f2 = norm(x - Q * c2, n);
                if (f2 < fc) {
                    c = c2;
                    fc = f2;
                    moved = true;
                    break;
                }
            }
        }
        h = moved ? std::min(2.0 * h, h0) : 0.5 * h;
    }
    return fc;
}

double hausdorff_one_sided(const Subspace& V, const Subspace& W, const NormSpec& n, const Budget& budget) {
    if (V.ambient_dim() != W.ambient_dim()) throw std::invalid_argument("hausdorff_distance: ambient mismatch");
    const Mat& QV = V.basis();
    const Mat& QW = W.basis();
    // L2 argmax as a warm start: direction of V furthest from W
    Mat R = QV - QW * (QW.transpose() * QV);
    Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullV);
    std::vector<Vec> starts{svd.matrixV().col(0)};
    const Budget inner = inner_budget(W.dim());
    auto f = [&](const Vec& x) { return point_to_sphere_distance(x, W, n, inner); };
    return sphere_extremize(f, QV, n, Extremum::max, budget, starts).value;
}

double hausdorff_distance(const Subspace& V, const Subspace& W, const NormSpec& n, const Budget& budget) {
    double a = hausdorff_one_sided(V, W, n, budget);
    double b = hausdorff_one_sided(W, V, n, budget);
    return std::max(a, b);
}

Projection oblique_projection(const Subspace& U, const Subspace& V) {
    const Eigen::Index d = U.ambient_dim();
    if (V.ambient_dim() != d) throw std::invalid_argument("oblique_projection: ambient mismatch");
    if (U.dim() + V.dim() != d) throw std::invalid_argument("oblique_projection: dimensions do not sum to d");
    Eigen::JacobiSVD<Mat> cosines(U.basis().transpose() * V.basis());
    if (cosines.singularValues().size() && cosines.singularValues()[0] >= 1.0 - 1e-10)
        throw std::invalid_argument("oblique_projection: subspaces are not complementary");
    Mat M(d, d);
    M << U.basis(), V.basis();
    Eigen::FullPivLU<Mat> lu(M);
    if (lu.rank() < d) throw std::invalid_argument("oblique_projection: subspaces are not complementary");
    instrument::note_inversion();
    // Π M = [U 0]  =>  M^T Π^T = [U 0]^T
    Mat target = Mat::Zero(d, d);
    target.leftCols(U.dim()) = U.basis();
    Eigen::FullPivLU<Mat> lut(M.transpose());
    Mat Pi = lut.solve(target.transpose()).transpose();
    return {Pi, U, V};
}

Subspace euclidean_complement(const Subspace& V) {
    const Eigen::Index d = V.ambient_dim(), k = V.dim();
    if (k < 1 || k >= d) throw std::invalid_argument("euclidean_complement: need 1 <= k < d");
    Eigen::HouseholderQR<Mat> qr(V.basis());
    Mat Q = qr.householderQ() * Mat::Identity(d, d);
    return Subspace::span(Q.rightCols(d - k));
}

// ---------------------------------------------------------------------------

namespace {

using u128 = unsigned __int128;

u128 sat_pow(u128 base, Eigen::Index e) {
    const u128 cap = static_cast<u128>(1) << 100;
    u128 r = 1;
    for (Eigen::Index i = 0; i < e; ++i) {
        r *= base;
        if (r > cap) return cap;
    }
    return r;
}

// numerator of the t-th value at a level with denominator q: 0, 1, -1, 2, -2, ...
long numerator(long t) { return t == 0 ? 0 : (t % 2 ? (t + 1) / 2 : -(t / 2)); }

}  // namespace

DenseEnumeration::DenseEnumeration(Eigen::Index d, Eigen::Index k) : d_(d), k_(k) {
    if (d < 1 || k < 1 || k > d) throw std::invalid_argument("DenseEnumeration: need 1 <= k <= d");
    for_each_subset(static_cast<int>(d), static_cast<int>(k), [&](const std::vector<int>& s) { charts_.push_back(s); });
}

Subspace DenseEnumeration::operator()(std::uint64_t index) const {
    if (index < 1) throw std::invalid_argument("DenseEnumeration: indices start at 1");
    const Eigen::Index p = (d_ - k_) * k_;
    u128 i0 = index - 1;
    const u128 charts = charts_.size();
    for (int j = 0; j <= max_level; ++j) {
        const long q = 1L << j;
        const long N = 2 * q + 1;
        const long E = j == 0 ? 0 : q + 1;  // values already present one level up
        u128 fresh = sat_pow(N, p) - (j == 0 ? 0 : sat_pow(E, p));
        if (p == 0 && j > 0) fresh = 0;
        const u128 cnt = fresh * charts;
        if (i0 >= cnt) {
            i0 -= cnt;
            continue;
        }
        const std::size_t chart = static_cast<std::size_t>(i0 / fresh);
        u128 r = i0 % fresh;
        std::vector<long> num(p);
        bool has_new = j == 0;
        for (Eigen::Index pos = 0; pos < p; ++pos) {
            const Eigen::Index rem = p - pos - 1;
            for (long t = 0; t < N; ++t) {
                const bool odd = numerator(t) % 2 != 0;
                const u128 completions =
                    (has_new || odd) ? sat_pow(N, rem) : sat_pow(N, rem) - sat_pow(E, rem);
                if (r < completions) {
                    num[pos] = numerator(t);
                    has_new = has_new || odd;
                    break;
                }
                r -= completions;
            }
        }
        Mat B = Mat::Zero(d_, k_);
        const auto& piv = charts_[chart];
        std::vector<bool> is_piv(d_, false);
        for (Eigen::Index c = 0; c < k_; ++c) {
            B(piv[c], c) = 1.0;
            is_piv[piv[c]] = true;
        }
        Eigen::Index a = 0;
        for (Eigen::Index row = 0; row < d_; ++row) {
            if (is_piv[row]) continue;
            for (Eigen::Index c = 0; c < k_; ++c) B(row, c) = static_cast<double>(num[a * k_ + c]) / q;
            ++a;
        }
        return Subspace::span(B);
    }
    throw Exhausted("DenseEnumeration: index beyond supported depth");
}

std::vector<Vec> measurable_basis(const Subspace& V, const NormSpec& n, std::uint64_t max_index) {
    const Eigen::Index d = V.ambient_dim();
    const Mat PV = V.projector();
    DenseEnumeration lines(d, 1);
    std::vector<Vec> out;
    Mat prev(d, 0);
    for (Eigen::Index i = 0; i < V.dim(); ++i) {
        auto pred = [&](const Subspace& L) {
            Vec y = PV * L.basis().col(0);
            if (y.norm() < 0.5) return false;
            Vec r = y - prev * (prev.transpose() * y);
            return r.norm() >= 0.5 * y.norm();
        };
        auto [L, idx] = first_hit(lines, pred, max_index);
        (void)idx;
        Vec y = PV * L.basis().col(0);
        out.push_back(y / norm(y, n));
        prev = orthonormalize([&] {
            Mat m(d, prev.cols() + 1);
            m << prev, y;
            return m;
        }());
    }
    return out;
}

Subspace push_forward(const Mat& T, const Subspace& V, double rank_tol) {
    Mat M = T * V.basis();
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() < V.dim() || s[0] == 0.0 || s[V.dim() - 1] <= rank_tol * s[0])
        throw DimensionCollapse("push_forward: image has lower dimension");
    return Subspace::span(M);
}

}  // namespace metlab
