#pragma once

#include "metlab/normed.hpp"

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace metlab {

class DimensionCollapse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Exhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A k-dimensional subspace of R^d held by a canonical Euclidean-orthonormal
// basis. The basis depends only on the span: it is read off a column-pivoted
// QR of the orthogonal projector.
class Subspace {
public:
    Subspace() = default;

    // Span of the columns; rank-deficient input gives the span of lower
    // dimension. Throws std::invalid_argument on an empty span.
    static Subspace span(const Mat& vectors, double rank_tol = 1e-12);
    static Subspace coordinate(Eigen::Index d, const std::vector<int>& axes);
    static Subspace whole(Eigen::Index d);

    Eigen::Index ambient_dim() const { return basis_.rows(); }
    Eigen::Index dim() const { return basis_.cols(); }
    const Mat& basis() const { return basis_; }
    Mat projector() const { return basis_ * basis_.transpose(); }

    // Equal spans: Euclidean sphere distance below 1e-9.
    bool operator==(const Subspace& o) const;

private:
    explicit Subspace(Mat b) : basis_(std::move(b)) {}
    Mat basis_;
};

struct Projection {
    Mat matrix;
    Subspace range;
    Subspace kernel;

    double idempotency_residual() const;
};

// Hausdorff distance between unit spheres, max of the two one-sided terms.
double hausdorff_distance(const Subspace& V, const Subspace& W, const NormSpec& n, const Budget& budget = {});
double hausdorff_one_sided(const Subspace& V, const Subspace& W, const NormSpec& n, const Budget& budget = {});

// inf over w in W of ‖x - w‖ (distance to the subspace, not to its sphere).
double point_to_subspace_distance(const Vec& x, const Subspace& W, const NormSpec& n);
// inf over unit w in W of ‖x - w‖.
double point_to_sphere_distance(const Vec& x, const Subspace& W, const NormSpec& n, const Budget& budget = {});

// Largest principal angle for equal-dimensional subspaces, via the sine.
double largest_principal_angle(const Subspace& V, const Subspace& W);

Projection oblique_projection(const Subspace& U, const Subspace& V);
Subspace euclidean_complement(const Subspace& V);

// Index-addressable stream over 𝒢_k(R^d), 1-based. Level j lists the chart
// matrices X with entries in 2^{-j}Z ∩ [-1,1] that did not appear at an
// earlier level, for every pivot set; element = span of P[I; X].
class DenseEnumeration {
public:
    DenseEnumeration(Eigen::Index d, Eigen::Index k);

    Eigen::Index ambient_dim() const { return d_; }
    Eigen::Index dim() const { return k_; }

    // Throws Exhausted past the end (only possible when k == d) or past
    // the supported depth.
    Subspace operator()(std::uint64_t index) const;
    Subspace at(std::uint64_t index) const { return (*this)(index); }

    static constexpr int max_level = 20;

private:
    Eigen::Index d_, k_;
    std::vector<std::vector<int>> charts_;
};

template <class Stream, class Pred>
auto first_hit(const Stream& stream, Pred&& pred, std::uint64_t max_index)
    -> std::pair<decltype(stream(std::uint64_t{1})), std::uint64_t> {
    if (max_index < 1) throw std::invalid_argument("first_hit: max_index must be >= 1");
    for (std::uint64_t i = 1; i <= max_index; ++i) {
        auto e = stream(i);
        if (pred(e)) return {std::move(e), i};
    }
    throw Exhausted("first_hit: no element satisfied the predicate within the budget");
}

std::vector<Vec> measurable_basis(const Subspace& V, const NormSpec& n, std::uint64_t max_index = 100000);

// Canonical span of T * basis(V). Throws DimensionCollapse when the image
// has lower dimension.
Subspace push_forward(const Mat& T, const Subspace& V, double rank_tol = 1e-13);

}  // namespace metlab
