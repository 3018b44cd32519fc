#pragma once

#include "metlab/normed.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace metlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A base point is σ^t applied to the root state (x, y). Integer states live
// in Z_Q with Q = 2^61 - 1; the shift stores a signed index offset in x.
struct BasePoint {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    std::int64_t t = 0;
};

std::uint64_t prf(std::uint64_t key, std::uint64_t index, std::uint64_t channel = 0);
double prf_uniform(std::uint64_t key, std::uint64_t index, std::uint64_t channel = 0);

class BaseSystem {
public:
    enum class Kind { rotation, cat_map, bernoulli_shift };
    static constexpr std::uint64_t Q = (1ULL << 61) - 1;

    // alpha is replaced by the nearest a/Q, a rational surrogate with period Q
    static BaseSystem rotation(double alpha = 0.6180339887498949);
    // exact surrogate a/Q
    static BaseSystem rotation_exact(std::uint64_t a);
    static BaseSystem cat_map();
    static BaseSystem bernoulli_shift(int alphabet, std::uint64_t key, std::vector<double> probs = {});

    Kind kind() const { return kind_; }
    std::string kind_name() const;
    int alphabet() const { return alphabet_; }
    const std::vector<double>& probs() const { return probs_; }
    std::uint64_t key() const { return key_; }
    std::uint64_t rotation_step() const { return step_; }
    double alpha() const { return static_cast<double>(step_) / static_cast<double>(Q); }

    BasePoint orbit(const BasePoint& w, std::int64_t n) const;
    BasePoint initial(std::uint64_t seed) const;
    // i-th independent draw from the invariant measure
    BasePoint sample(std::uint64_t seed, std::uint64_t i) const;

    // exact state after applying σ^t: rotation -> (x, 0); cat map -> (x, y);
    // shift -> (index, 0) with the index stored two's-complement
    std::pair<std::uint64_t, std::uint64_t> state(const BasePoint& w) const;
    double coordinate(const BasePoint& w) const;
    int symbol(const BasePoint& w) const;
    double uniform(const BasePoint& w, std::uint64_t channel) const;

    // Every point is written as σ^tau(root) with a root shared by its whole
    // orbit (one root per system for rotation and shift).
    struct Canon {
        BasePoint root;
        std::int64_t tau = 0;
        std::uint64_t root_digest = 0;
    };
    Canon canonical(const BasePoint& w) const;

private:
    Kind kind_ = Kind::rotation;
    std::uint64_t step_ = 0;
    std::uint64_t step_inv_ = 0;
    int alphabet_ = 1;
    std::uint64_t key_ = 0;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
};

class Generator {
public:
    enum class Kind { constant, symbol_table, rotation_cell, conjugated_diagonal, custom };

    static Generator constant(Mat A);
    static Generator symbol_table(std::vector<Mat> mats);
    static Generator rotation_cell(std::vector<double> breaks, std::vector<Mat> mats);
    // P diag(d_s) P^{-1}; P^{-1} is formed once here (counted by instrumentation)
    static Generator conjugated_diagonal(Mat P, std::vector<Vec> diagonals);
    static Generator custom(int dim, std::function<Mat(const BaseSystem&, const BasePoint&)> fn);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    Mat operator()(const BaseSystem& base, const BasePoint& w) const;

    const std::vector<Mat>& matrices() const { return mats_; }
    const std::vector<double>& breaks() const { return breaks_; }
    const Mat& conjugator() const { return P_; }
    const std::vector<Vec>& diagonals() const { return diags_; }

private:
    Kind kind_ = Kind::constant;
    int dim_ = 0;
    std::vector<Mat> mats_;
    std::vector<double> breaks_;
    Mat P_;
    std::vector<Vec> diags_;
    std::function<Mat(const BaseSystem&, const BasePoint&)> fn_;
};

// e^{log_scale} * m. A zero operator has m = 0 and log_scale = 0.
struct ScaledMatrix {
    Mat m;
    double log_scale = 0.0;

    bool is_zero() const { return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0; }
    double log_norm(const NormSpec& n) const;
    Mat dense() const { return std::exp(log_scale) * m; }
};

// Λ^k A on lexicographically ordered k-subsets.
Mat compound(const Mat& A, int k);

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t entries = 0;
};

class CocycleSystem {
public:
    CocycleSystem(BaseSystem base, Generator gen, NormSpec norm, std::uint64_t seed = 0);

    int dim() const { return gen_.dim(); }
    const BaseSystem& base() const { return base_; }
    const Generator& generator() const { return gen_; }
    const NormSpec& norm() const { return norm_; }
    std::uint64_t seed() const { return seed_; }
    BasePoint initial() const { return base_.initial(seed_); }

    Mat at(const BasePoint& w) const;  // L_ω

    // L_{σ^{b-1}ω} ··· L_{σ^a ω}; a == b gives the identity. Built from
    // memoized aligned dyadic blocks of the canonical orbit time.
    ScaledMatrix evaluate_interval(const BasePoint& w, std::int64_t a, std::int64_t b) const;
    // Λ^k of the same product, with generators whose k-th singular value
    // falls below 1e-12 of the first contributing an exact zero.
    ScaledMatrix compound_interval(const BasePoint& w, std::int64_t a, std::int64_t b, int k) const;

    // log ‖L_{a→b}‖ in the ambient norm (−∞ for the zero operator)
    double log_norm(const BasePoint& w, std::int64_t a, std::int64_t b) const;
    // log(σ_1 ··· σ_k) of L_{a→b}, Euclidean
    double log_sv_sum(const BasePoint& w, std::int64_t a, std::int64_t b, int k) const;

    CacheStats cache_stats() const;
    void clear_cache() const;
    void set_cache_limit(std::size_t entries) const;

private:
    ScaledMatrix block(const BaseSystem::Canon& c, int k, int level, std::int64_t q) const;
    ScaledMatrix leaf(const BaseSystem::Canon& c, int k, std::int64_t tau) const;

    BaseSystem base_;
    Generator gen_;
    NormSpec norm_;
    std::uint64_t seed_;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

ScaledMatrix multiply(const ScaledMatrix& later, const ScaledMatrix& earlier);

struct IntegrabilityEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int samples = 0;
};
IntegrabilityEstimate integrability_estimate(const CocycleSystem& c, int samples, std::uint64_t seed);

}  // namespace metlab
