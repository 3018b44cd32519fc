#include "metlab/opstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

namespace metlab {

std::string to_string(Method m) {
    switch (m) {
        case Method::automatic: return "automatic";
        case Method::closed_form: return "closed_form";
        case Method::optimized: return "optimized";
        case Method::enumerated: return "enumerated";
    }
    return "?";
}

bool holds(double lhs, double rhs, double abs_floor) { return lhs <= rhs * (1.0 + kCheckSlack) + abs_floor; }

double snumber_constant(int k) { return std::pow(4.0, k - 1) * std::sqrt(std::tgamma(static_cast<double>(k))); }

std::string digest(const std::vector<const Mat*>& mats, const std::string& extra) {
    std::uint64_t h = 1469598103934665603ULL;
    auto eat = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const Mat* m : mats) {
        Eigen::Index dims[2] = {m->rows(), m->cols()};
        eat(dims, sizeof dims);
        for (Eigen::Index j = 0; j < m->cols(); ++j)
            for (Eigen::Index i = 0; i < m->rows(); ++i) {
                double v = (*m)(i, j);
                eat(&v, sizeof v);
            }
    }
    eat(extra.data(), extra.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const Inequality* CheckReport::tightest() const {
    const Inequality* best = nullptr;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& it : items) {
        double rel = it.slack() / std::max({std::abs(it.lhs), std::abs(it.rhs), 1e-300});
        if (rel < worst) {
            worst = rel;
            best = &it;
        }
    }
    return best;
}

double min_growth(const Mat& T, const Subspace& V, const NormSpec& n, const Budget& budget) {
    return ratio_inf(T, V.basis(), n, budget).value;
}

double restricted_norm(const Mat& T, const Subspace& V, const NormSpec& n, const Budget& budget) {
    return ratio_sup(T, V.basis(), n, budget).value;
}

namespace {

Mat complement_basis(const Mat& F) {
    const Eigen::Index d = F.rows();
    Eigen::HouseholderQR<Mat> qr(F);
    Mat Q = qr.householderQ() * Mat::Identity(d, d);
    return Q.rightCols(d - F.cols());
}

std::vector<Mat> coordinate_starts(Eigen::Index d, Eigen::Index k) {
    std::vector<Mat> out;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        Mat B = Mat::Zero(d, k);
        for (Eigen::Index j = 0; j < k; ++j) B(idx[j], j) = 1.0;
        out.push_back(B);
        Eigen::Index i = k - 1;
        while (i >= 0 && idx[i] == d - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (Eigen::Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

bool is_exact(const NormSpec& n, Eigen::Index d) { return n.kind == NormSpec::Kind::L2 || polyhedral(n, d).has_value(); }

}  // namespace

ChartResult grassmann_optimize(Eigen::Index d, Eigen::Index k, const std::function<double(const Mat&)>& F,
                               Extremum mode, const std::vector<Mat>& starts, const GrassBudget& budget) {
    if (k < 1 || k > d) throw std::invalid_argument("grassmann_optimize: need 1 <= k <= d");
    const double sign = mode == Extremum::max ? -1.0 : 1.0;
    int evals = 0;
    auto obj = [&](const Mat& B) {
        ++evals;
        return sign * F(B);
    };
    if (k == d) {
        Mat I = Mat::Identity(d, d);
        return {sign * obj(I), Subspace::whole(d)};
    }

    std::vector<Mat> cands;
    for (const Mat& s : starts) {
        Mat Q = orthonormalize(s);
        if (Q.cols() == k) cands.push_back(Q);
    }
    for (const Mat& s : coordinate_starts(d, k)) cands.push_back(s);
    for (int i = 1; i <= budget.halton_starts; ++i) {
        Vec h = 2.0 * halton(static_cast<std::size_t>(i), d * k).array() - 1.0;
        Mat Q = orthonormalize(Eigen::Map<Mat>(h.data(), d, k));
        if (Q.cols() == k) cands.push_back(Q);
    }
    std::vector<double> vals(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) vals[i] = obj(cands[i]);
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

    Mat best_B = cands[order[0]];
    double best = vals[order[0]];
    const Eigen::Index p = (d - k) * k;
    const int refine = std::min<int>(budget.refine, static_cast<int>(cands.size()));
    for (int r = 0; r < refine; ++r) {
        Mat S = cands[order[r]];
        double fS = vals[order[r]];
        const double h0 = 0.25;
        double h = h0;
        while (h > budget.tol && evals < budget.max_evals) {
            Mat C = complement_basis(S);
            auto at = [&](const Vec& x) {
                return orthonormalize(S + C * Eigen::Map<const Mat>(x.data(), d - k, k));
            };
            bool moved = false;
            for (Eigen::Index i = 0; i < p && !moved; ++i) {
                for (double s : {1.0, -1.0}) {
                    Vec x = Vec::Zero(p);
                    x[i] = s * h;
                    Mat B = at(x);
                    if (B.cols() != k) continue;
                    double f = obj(B);
                    if (f < fS) {
                        S = B;
                        fS = f;
                        moved = true;
                        break;
                    }
                }
            }
            for (Eigen::Index i = 0; i < p && !moved; ++i) {
                for (Eigen::Index j = i + 1; j < p && !moved; ++j) {
                    for (double si : {1.0, -1.0}) {
                        for (double sj : {1.0, -1.0}) {
                            Vec x = Vec::Zero(p);
                            x[i] = si * h;
                            x[j] = sj * h;
                            Mat B = at(x);
                            if (B.cols() != k) continue;
                            double f = obj(B);
                            if (f < fS) {
                                S = B;
                                fS = f;
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
        if (fS < best) {
            best = fS;
            best_B = S;
        }
    }
    return {sign * best, Subspace::span(best_B)};
}

GrowthReport bernstein(const Mat& T, int k, const NormSpec& n, Method method, const GrassBudget& budget) {
    const Eigen::Index d = T.cols();
    if (k < 1 || k > d) throw std::invalid_argument("bernstein: invalid k");
    if (method == Method::automatic) method = n.kind == NormSpec::Kind::L2 ? Method::closed_form : Method::optimized;
    if (method == Method::closed_form && n.kind != NormSpec::Kind::L2)
        throw std::invalid_argument("bernstein: closed form needs the L2 norm");

    GrowthReport rep;
    rep.k = k;
    rep.method = method;
    const double gap = is_exact(n, d) ? 0.0 : 2.0 * budget.sphere.tol * operator_norm(T, NormSpec::l2());

    if (method == Method::closed_form) {
        Eigen::JacobiSVD<Mat> svd(T, Eigen::ComputeFullV);
        rep.value = svd.singularValues()[k - 1];
        rep.witness = Subspace::span(svd.matrixV().leftCols(k));
        return rep;
    }
    if (method == Method::enumerated) {
        DenseEnumeration en(d, k);
        double best = -1.0;
        for (std::uint64_t i = 1; i <= budget.enumeration; ++i) {
            Subspace V;
            try {
                V = en(i);
            } catch (const Exhausted&) {
                break;
            }
            double g = min_growth(T, V, n, budget.sphere);
            if (g > best) {
                best = g;
                rep.witness = V;
            }
        }
        rep.value = best;
        rep.certified_gap = gap;
        return rep;
    }
    // optimized
    if (k == 1 || k == d) {
        auto r = k == 1 ? ratio_sup(T, Mat::Identity(d, d), n, budget.sphere)
                        : ratio_inf(T, Mat::Identity(d, d), n, budget.sphere);
        rep.value = k == 1 ? operator_norm(T, n) : r.value;
        rep.witness = k == 1 ? Subspace::span(r.witness) : Subspace::whole(d);
        rep.certified_gap = r.exact ? 0.0 : gap;
        return rep;
    }
    std::vector<Mat> starts;
    if (budget.euclidean_start) {
        Eigen::JacobiSVD<Mat> svd(T, Eigen::ComputeFullV);
        starts.push_back(svd.matrixV().leftCols(k));
    }
    auto res = grassmann_optimize(
        d, k, [&](const Mat& B) { return ratio_inf(T, B, n, budget.sphere).value; }, Extremum::max, starts, budget);
    rep.value = res.value;
    rep.witness = res.best;
    rep.certified_gap = gap;
    return rep;
}

double gelfand(const Mat& T, int k, const NormSpec& n, Method method, const GrassBudget& budget) {
    const Eigen::Index d = T.cols();
    if (k < 1 || k > d) throw std::invalid_argument("gelfand: invalid k");
    if (method == Method::automatic) method = n.kind == NormSpec::Kind::L2 ? Method::closed_form : Method::optimized;
    if (method == Method::closed_form) {
        if (n.kind != NormSpec::Kind::L2) throw std::invalid_argument("gelfand: closed form needs the L2 norm");
        Eigen::JacobiSVD<Mat> svd(T);
        return svd.singularValues()[k - 1];
    }
    if (k == 1) return operator_norm(T, n);
    if (k == d) return ratio_inf(T, Mat::Identity(d, d), n, budget.sphere).value;
    // V = annihilator of a (k-1)-dimensional span of functionals
    auto F = [&](const Mat& funcs) { return ratio_sup(T, complement_basis(funcs), n, budget.sphere).value; };
    if (method == Method::enumerated) {
        DenseEnumeration en(d, k - 1);
        double best = std::numeric_limits<double>::infinity();
        for (std::uint64_t i = 1; i <= budget.enumeration; ++i) {
            Subspace U;
            try {
                U = en(i);
            } catch (const Exhausted&) {
                break;
            }
            best = std::min(best, F(U.basis()));
        }
        return best;
    }
    std::vector<Mat> starts;
    if (budget.euclidean_start) {
        Eigen::JacobiSVD<Mat> svd(T, Eigen::ComputeFullV);
        starts.push_back(svd.matrixV().leftCols(k - 1));
    }
    return grassmann_optimize(d, k - 1, F, Extremum::min, starts, budget).value;
}

// ---------------------------------------------------------------------------

namespace {

Inequality ineq(std::string name, double lhs, double rhs, double abs_floor) {
    return {std::move(name), lhs, rhs, holds(lhs, rhs, abs_floor)};
}

void finish(CheckReport& r) {
    r.pass = std::all_of(r.items.begin(), r.items.end(), [](const Inequality& i) { return i.pass; });
}

double floor_for(const Mat& T) { return 1e-12 * std::max(1.0, T.cwiseAbs().maxCoeff()); }

}  // namespace

CheckReport check_growth_inequalities(const Mat& T, const Mat& S, const Subspace& V, int k, const NormSpec& n) {
    CheckReport r;
    r.lemma = "growth_inequalities";
    r.inputs_digest = digest({&T, &S, &V.basis()}, n.name() + ":" + std::to_string(k));
    const Mat ST = S * T;
    const double fl = floor_for(ST) + floor_for(T) * std::max(1.0, S.cwiseAbs().maxCoeff());

    const double gT = min_growth(T, V, n);
    const double gST = min_growth(ST, V, n);
    const double nTV = restricted_norm(T, V, n);
    const double nS = operator_norm(S, n);
    Mat TB = T * V.basis();
    double gS_TV = 0.0;
    if (TB.cwiseAbs().maxCoeff() > 0.0) gS_TV = min_growth(S, Subspace::span(TB), n);
    r.values = {{"g_T(V)", gT}, {"g_S(TV)", gS_TV}, {"g_ST(V)", gST}, {"|T|_V|", nTV}, {"|S|", nS}};
    r.items.push_back(ineq("g_T(V) g_S(TV) <= g_ST(V)", gT * gS_TV, gST, fl));
    r.items.push_back(ineq("g_ST(V) <= |T|_V| g_S(TV)", gST, nTV * gS_TV, fl));
    r.items.push_back(ineq("g_ST(V) <= g_T(V) |S|", gST, gT * nS, fl));

    const double rT = bernstein(T, k, n).value;
    const double rS = bernstein(S, k, n).value;
    const double rST = bernstein(ST, k, n).value;
    r.values["rho_k(T)"] = rT;
    r.values["rho_k(S)"] = rS;
    r.values["rho_k(ST)"] = rST;
    // ρ_k(T)ρ_k(S) <= ρ_k(ST) fails in general (T = diag(10,1), S = diag(1,10), k = 1);
    // it is reported but not enforced, and the bound with g(S) = ρ_d(S) is checked
    const double gS = bernstein(S, static_cast<int>(S.cols()), n).value;
    r.values["g(S)"] = gS;
    r.flags["product_lower_bound_holds"] = holds(rT * rS, rST, fl);
    r.items.push_back(ineq("rho_k(T) g(S) <= rho_k(ST)", rT * gS, rST, fl));
    r.items.push_back(ineq("rho_k(ST) <= rho_k(T) |S|", rST, rT * nS, fl));
    finish(r);
    return r;
}

ContractionReport check_contraction(const Mat& T, const Subspace& V, const Subspace& W, double theta,
                                    const NormSpec& n) {
    const Eigen::Index d = T.cols();
    const int k = static_cast<int>(V.dim());
    if (W.dim() != V.dim()) throw PreconditionError("check_contraction: V and W differ in dimension");
    ContractionReport r;
    r.rho_k = bernstein(T, k, n).value;
    r.rho_k1 = k + 1 <= d ? bernstein(T, k + 1, n).value : 0.0;
    if (!(theta > r.rho_k1 && theta < r.rho_k))
        throw PreconditionError("check_contraction: theta outside (rho_{k+1}, rho_k)");
    if (!(min_growth(T, V, n) > theta) || !(min_growth(T, W, n) > theta))
        throw PreconditionError("check_contraction: V or W is not theta-fast");
    const double q = r.rho_k1 / theta;
    r.bound = 2.0 / (1.0 - q) * q;
    r.actual = hausdorff_distance(push_forward(T, V), push_forward(T, W), n);
    r.pass = r.actual <= r.bound * (1.0 + kCheckSlack);
    r.simplified_applies = theta > 2.0 * r.rho_k1;
    if (r.simplified_applies) {
        r.simplified_bound = 4.0 * q;
        r.simplified_pass = r.actual <= r.simplified_bound * (1.0 + kCheckSlack);
    }
    return r;
}

CheckReport check_sandwich(const Mat& T, const Projection& Pi, const Projection& PiPrime, int k, int l,
                           const NormSpec& n) {
    CheckReport r;
    r.lemma = "projection_sandwich";
    r.inputs_digest = digest({&T, &Pi.matrix, &PiPrime.matrix}, n.name() + ":" + std::to_string(k) + ":" +
                                                                     std::to_string(l));
    const Eigen::Index d = T.cols();
    const double comm = (PiPrime.matrix * T - T * Pi.matrix).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
    r.values["commutation_residual"] = comm;
    r.flags["hypothesis_equivariance"] = comm <= 1e-9 * scale;
    Eigen::JacobiSVD<Mat> svd(Pi.matrix);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
    r.flags["hypothesis_codimension"] = d - rank == k;
    const bool hyp = r.flags["hypothesis_equivariance"] && r.flags["hypothesis_codimension"];
    r.flags["hypothesis_ok"] = hyp;
    if (k + l > d || l < 1) throw std::invalid_argument("check_sandwich: need 1 <= l and k + l <= d");

    const Mat TPi = T * Pi.matrix;
    const double lower = bernstein(T, k + l, n).value;
    const double mid = bernstein(TPi, l, n).value;
    const double nPi = operator_norm(Pi.matrix, n);
    const double nPiP = operator_norm(PiPrime.matrix, n);
    const double fl = floor_for(TPi) * std::max(1.0, Pi.matrix.cwiseAbs().maxCoeff());
    r.values["rho_{k+l}(T)"] = lower;
    r.values["rho_l(T Pi)"] = mid;
    r.values["|Pi|"] = nPi;
    r.values["|Pi'|"] = nPiP;
    r.items.push_back(ineq("rho_{k+l}(T) <= rho_l(T Pi)", lower, mid, fl));

    const double gE = min_growth(T, Pi.kernel, n);
    const double nTV = restricted_norm(T, Pi.range, n);
    r.values["g_T(E)"] = gE;
    r.values["|T|_V|"] = nTV;
    const bool upper_applies = gE > nTV;
    r.flags["upper_applies"] = upper_applies;
    if (upper_applies) {
        r.items.push_back(ineq("rho_l(T Pi) <= 4 |Pi| |Pi'| rho_{k+l}(T)", mid, 4.0 * nPi * nPiP * lower, fl));
        r.flags["single_factor_pi_fails"] = !holds(mid, 4.0 * nPi * lower, fl);
        r.flags["single_factor_pi_prime_fails"] = !holds(mid, 4.0 * nPiP * lower, fl);
    }
    finish(r);
    r.pass = r.pass && hyp;
    return r;
}

CheckReport check_snumber_chain(const Mat& T, int k_max, const NormSpec& n) {
    CheckReport r;
    r.lemma = "snumber_chain";
    r.inputs_digest = digest({&T}, n.name() + ":" + std::to_string(k_max));
    if (k_max < 1 || k_max > T.cols()) throw std::invalid_argument("check_snumber_chain: invalid k_max");
    const double fl = floor_for(T);
    for (int k = 1; k <= k_max; ++k) {
        const double rho = bernstein(T, k, n).value;
        const double s = gelfand(T, k, n);
        const std::string ks = std::to_string(k);
        r.values["rho_" + ks] = rho;
        r.values["s_" + ks] = s;
        r.items.push_back(ineq("rho_" + ks + " <= s_" + ks, rho, s, fl));
        r.items.push_back(ineq("s_" + ks + " <= c_" + ks + " rho_" + ks, s, snumber_constant(k) * rho, fl));
    }
    finish(r);
    return r;
}

}  // namespace metlab
