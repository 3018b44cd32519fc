#include "metlab/cocycle.hpp"

#include "metlab/instrument.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace metlab {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
constexpr u64 Q = BaseSystem::Q;

u64 splitmix(u64 z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

u64 mulmod(u64 a, u64 b) {
    u128 p = static_cast<u128>(a) * b;
    u64 lo = static_cast<u64>(p & Q);
    u64 hi = static_cast<u64>(p >> 61);
    u64 r = lo + hi;
    while (r >= Q) r -= Q;
    return r;
}

u64 addmod(u64 a, u64 b) {
    u64 r = a + b;
    return r >= Q ? r - Q : r;
}

u64 powmod(u64 a, u64 e) {
    u64 r = 1;
    while (e) {
        if (e & 1) r = mulmod(r, a);
        a = mulmod(a, a);
        e >>= 1;
    }
    return r;
}

// signed integer reduced into [0, Q)
u64 reduce(std::int64_t t) {
    std::int64_t r = t % static_cast<std::int64_t>(Q);
    if (r < 0) r += static_cast<std::int64_t>(Q);
    return static_cast<u64>(r);
}

struct Mat2 {
    u64 a, b, c, d;
};

Mat2 mul(const Mat2& X, const Mat2& Y) {
    return {addmod(mulmod(X.a, Y.a), mulmod(X.b, Y.c)), addmod(mulmod(X.a, Y.b), mulmod(X.b, Y.d)),
            addmod(mulmod(X.c, Y.a), mulmod(X.d, Y.c)), addmod(mulmod(X.c, Y.b), mulmod(X.d, Y.d))};
}

// [[2,1],[1,1]]^t, negative t via the inverse [[1,-1],[-1,2]]
Mat2 cat_power(std::int64_t t) {
    Mat2 base = t >= 0 ? Mat2{2, 1, 1, 1} : Mat2{1, Q - 1, Q - 1, 2};
    u64 e = t >= 0 ? static_cast<u64>(t) : static_cast<u64>(-(t + 1)) + 1;
    Mat2 r{1, 0, 0, 1};
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

double to_unit(u64 v) { return static_cast<double>(v) / static_cast<double>(Q); }

}  // namespace

u64 prf(u64 key, u64 index, u64 channel) {
    u64 h = splitmix(key ^ 0x6a09e667f3bcc909ULL);
    h = splitmix(h ^ index);
    return splitmix(h ^ (channel * 0xd1b54a32d192ed03ULL));
}

double prf_uniform(u64 key, u64 index, u64 channel) {
    return static_cast<double>(prf(key, index, channel) >> 11) * 0x1.0p-53;
}

BaseSystem BaseSystem::rotation(double alpha) {
    if (!std::isfinite(alpha)) throw std::invalid_argument("rotation: alpha must be finite");
    double frac = alpha - std::floor(alpha);
    long double scaled = static_cast<long double>(frac) * static_cast<long double>(Q);
    return rotation_exact(static_cast<u64>(std::llround(scaled)) % Q);
}

BaseSystem BaseSystem::rotation_exact(u64 a) {
    BaseSystem b;
    b.kind_ = Kind::rotation;
    b.step_ = a % Q;
    if (b.step_ == 0) throw std::invalid_argument("rotation: alpha is too close to an integer");
    b.step_inv_ = powmod(b.step_, Q - 2);
    return b;
}

BaseSystem BaseSystem::cat_map() {
    BaseSystem b;
    b.kind_ = Kind::cat_map;
    return b;
}

BaseSystem BaseSystem::bernoulli_shift(int alphabet, u64 key, std::vector<double> probs) {
    if (alphabet < 1) throw std::invalid_argument("bernoulli_shift: alphabet must be positive");
    BaseSystem b;
    b.kind_ = Kind::bernoulli_shift;
    b.alphabet_ = alphabet;
    b.key_ = key;
    if (probs.empty()) probs.assign(alphabet, 1.0 / alphabet);
    if (static_cast<int>(probs.size()) != alphabet)
        throw std::invalid_argument("bernoulli_shift: probs size must equal alphabet");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("bernoulli_shift: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("bernoulli_shift: probs must sum to 1");
    b.probs_ = probs;
    b.cumulative_.resize(alphabet);
    std::partial_sum(probs.begin(), probs.end(), b.cumulative_.begin());
    b.cumulative_.back() = 1.0;
    return b;
}

std::string BaseSystem::kind_name() const {
    switch (kind_) {
        case Kind::rotation: return "rotation";
        case Kind::cat_map: return "cat_map";
        case Kind::bernoulli_shift: return "bernoulli_shift";
    }
    return "?";
}

BasePoint BaseSystem::orbit(const BasePoint& w, std::int64_t n) const {
    BasePoint r = w;
    r.t += n;
    return r;
}

BasePoint BaseSystem::initial(u64 seed) const { return sample(seed, 0); }

BasePoint BaseSystem::sample(u64 seed, u64 i) const {
    BasePoint p;
    switch (kind_) {
        case Kind::rotation: p.x = prf(seed, i, 1) % Q; break;
        case Kind::cat_map:
            p.x = prf(seed, i, 1) % Q;
            p.y = prf(seed, i, 2) % Q;
            break;
        case Kind::bernoulli_shift:
            // offsets below 2^40 keep orbit times far from overflow
            p.x = prf(seed, i, 1) >> 24;
            break;
    }
    return p;
}

std::pair<u64, u64> BaseSystem::state(const BasePoint& w) const {
    switch (kind_) {
        case Kind::rotation: return {addmod(w.x % Q, mulmod(reduce(w.t), step_)), 0};
        case Kind::cat_map: {
            Mat2 A = cat_power(w.t);
            u64 x = w.x % Q, y = w.y % Q;
            return {addmod(mulmod(A.a, x), mulmod(A.b, y)), addmod(mulmod(A.c, x), mulmod(A.d, y))};
        }
        case Kind::bernoulli_shift:
            return {static_cast<u64>(static_cast<std::int64_t>(w.x) + w.t), 0};
    }
    return {0, 0};
}

double BaseSystem::coordinate(const BasePoint& w) const {
    auto s = state(w);
    if (kind_ == Kind::bernoulli_shift) return prf_uniform(key_, s.first, 0);
    return to_unit(s.first);
}

int BaseSystem::symbol(const BasePoint& w) const {
    double u = coordinate(w);
    if (kind_ == Kind::bernoulli_shift) {
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(), alphabet_ - 1));
    }
    return std::min(alphabet_ - 1, static_cast<int>(u * alphabet_));
}

double BaseSystem::uniform(const BasePoint& w, u64 channel) const {
    auto s = state(w);
    return prf_uniform(key_ ^ s.second, s.first, channel + 1);
}

BaseSystem::Canon BaseSystem::canonical(const BasePoint& w) const {
    Canon c;
    switch (kind_) {
        case Kind::rotation: {
            // x = k·a mod Q with k = x·a^{-1}; the point is σ^{k+t}(0)
            u64 k = mulmod(w.x % Q, step_inv_);
            c.tau = static_cast<std::int64_t>(k) + w.t;
            c.root_digest = 0x726f74ULL;
            break;
        }
        case Kind::cat_map:
            c.root.x = w.x % Q;
            c.root.y = w.y % Q;
            c.tau = w.t;
            c.root_digest = prf(c.root.x, c.root.y, 7);
            break;
        case Kind::bernoulli_shift:
            c.tau = static_cast<std::int64_t>(w.x) + w.t;
            c.root_digest = 0x736866ULL;
            break;
    }
    return c;
}

Generator Generator::constant(Mat A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("generator: matrix must be square");
    if (!A.allFinite()) throw std::invalid_argument("generator: non-finite entries");
    Generator g;
    g.kind_ = Kind::constant;
    g.dim_ = static_cast<int>(A.rows());
    g.mats_ = {std::move(A)};
    return g;
}

Generator Generator::symbol_table(std::vector<Mat> mats) {
    if (mats.empty()) throw std::invalid_argument("symbol_table: empty table");
    Generator g;
    g.kind_ = Kind::symbol_table;
    g.dim_ = static_cast<int>(mats.front().rows());
    for (const Mat& m : mats) {
        if (m.rows() != g.dim_ || m.cols() != g.dim_) throw std::invalid_argument("symbol_table: shape mismatch");
        if (!m.allFinite()) throw std::invalid_argument("symbol_table: non-finite entries");
    }
    g.mats_ = std::move(mats);
    return g;
}

Generator Generator::rotation_cell(std::vector<double> breaks, std::vector<Mat> mats) {
    if (mats.size() != breaks.size() + 1) throw std::invalid_argument("rotation_cell: need one matrix per arc");
    if (!std::is_sorted(breaks.begin(), breaks.end())) throw std::invalid_argument("rotation_cell: unsorted breaks");
    for (double b : breaks)
        if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("rotation_cell: breaks must lie in (0,1)");
    Generator g = symbol_table(std::move(mats));
    g.kind_ = Kind::rotation_cell;
    g.breaks_ = std::move(breaks);
    return g;
}

Generator Generator::conjugated_diagonal(Mat P, std::vector<Vec> diagonals) {
    if (P.rows() != P.cols() || diagonals.empty()) throw std::invalid_argument("conjugated_diagonal: bad shapes");
    Eigen::FullPivLU<Mat> lu(P);
    if (!lu.isInvertible()) throw std::invalid_argument("conjugated_diagonal: P must be invertible");
    instrument::note_inversion();
    Mat Pinv = lu.inverse();
    std::vector<Mat> mats;
    for (const Vec& dvec : diagonals) {
        if (dvec.size() != P.rows()) throw std::invalid_argument("conjugated_diagonal: diagonal size mismatch");
        mats.push_back(P * dvec.asDiagonal() * Pinv);
    }
    Generator g = symbol_table(std::move(mats));
    g.kind_ = Kind::conjugated_diagonal;
    g.P_ = std::move(P);
    g.diags_ = std::move(diagonals);
    return g;
}

Generator Generator::custom(int dim, std::function<Mat(const BaseSystem&, const BasePoint&)> fn) {
    if (dim < 1 || !fn) throw std::invalid_argument("custom generator: bad arguments");
    Generator g;
    g.kind_ = Kind::custom;
    g.dim_ = dim;
    g.fn_ = std::move(fn);
    return g;
}

Mat Generator::operator()(const BaseSystem& base, const BasePoint& w) const {
    switch (kind_) {
        case Kind::constant: return mats_.front();
        case Kind::symbol_table:
        case Kind::conjugated_diagonal: {
            int s = base.symbol(w);
            if (s >= static_cast<int>(mats_.size())) throw std::out_of_range("generator: symbol outside table");
            return mats_[s];
        }
        case Kind::rotation_cell: {
            double u = base.coordinate(w);
            auto it = std::upper_bound(breaks_.begin(), breaks_.end(), u);
            return mats_[it - breaks_.begin()];
        }
        case Kind::custom: return fn_(base, w);
    }
    return {};
}

double ScaledMatrix::log_norm(const NormSpec& n) const {
    if (is_zero()) return kNegInf;
    return log_scale + std::log(operator_norm(m, n));
}

namespace {

void rescale(ScaledMatrix& s) {
    double mx = s.m.cwiseAbs().maxCoeff();
    if (mx == 0.0) {
        s.log_scale = 0.0;
        return;
    }
    if (!std::isfinite(mx)) throw std::runtime_error("interval product overflow");
    int e;
    std::frexp(mx, &e);
    // power-of-two scaling is exact
    s.m *= std::ldexp(1.0, -e);
    s.log_scale += e * std::log(2.0);
}

std::vector<std::vector<int>> subsets(int d, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k);
    std::iota(cur.begin(), cur.end(), 0);
    if (k == 0) return {{}};
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == d - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

}  // namespace

ScaledMatrix multiply(const ScaledMatrix& later, const ScaledMatrix& earlier) {
    ScaledMatrix r;
    r.m = later.m * earlier.m;
    r.log_scale = later.log_scale + earlier.log_scale;
    rescale(r);
    return r;
}

Mat compound(const Mat& A, int k) {
    const int d = static_cast<int>(A.rows());
    if (k < 1 || k > d || A.cols() != d) throw std::invalid_argument("compound: need square A and 1 <= k <= d");
    if (k == 1) return A;
    auto sets = subsets(d, k);
    const auto N = static_cast<Eigen::Index>(sets.size());
    Mat C(N, N);
    Mat sub(k, k);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) {
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) sub(r, c) = A(sets[i][r], sets[j][c]);
            C(i, j) = sub.determinant();
        }
    return C;
}

struct CocycleSystem::Cache {
    struct Key {
        u64 root;
        int k;
        int level;
        std::int64_t q;
        bool operator==(const Key& o) const { return root == o.root && k == o.k && level == o.level && q == o.q; }
    };
    struct Hash {
        std::size_t operator()(const Key& key) const {
            return prf(key.root, static_cast<u64>(key.q), (static_cast<u64>(key.k) << 8) | key.level);
        }
    };
    mutable std::shared_mutex mu;
    std::unordered_map<Key, ScaledMatrix, Hash> map;
    std::size_t limit = 1'000'000;
    std::atomic<u64> hits{0};
    std::atomic<u64> misses{0};
};

CocycleSystem::CocycleSystem(BaseSystem base, Generator gen, NormSpec norm, u64 seed)
    : base_(std::move(base)), gen_(std::move(gen)), norm_(std::move(norm)), seed_(seed),
      cache_(std::make_shared<Cache>()) {
    norm_.validate(gen_.dim());
    if ((gen_.kind() == Generator::Kind::symbol_table || gen_.kind() == Generator::Kind::conjugated_diagonal) &&
        static_cast<int>(gen_.matrices().size()) < base_.alphabet() && base_.kind() == BaseSystem::Kind::bernoulli_shift)
        throw std::invalid_argument("cocycle: symbol table smaller than the shift alphabet");
}

Mat CocycleSystem::at(const BasePoint& w) const { return gen_(base_, w); }

ScaledMatrix CocycleSystem::leaf(const BaseSystem::Canon& c, int k, std::int64_t tau) const {
    BasePoint p = c.root;
    p.t = tau;
    Mat A = gen_(base_, p);
    if (A.rows() != dim() || A.cols() != dim() || !A.allFinite())
        throw std::runtime_error("generator produced an invalid matrix");
    ScaledMatrix s;
    if (k == 0) {
        s.m = A;
    } else {
        Eigen::JacobiSVD<Mat> svd(A);
        const Vec& sv = svd.singularValues();
        bool deficient = sv(0) == 0.0 || sv(k - 1) < 1e-12 * sv(0);
        const auto N = static_cast<Eigen::Index>(subsets(dim(), k).size());
        s.m = deficient ? Mat::Zero(N, N) : compound(A, k);
    }
    rescale(s);
    return s;
}

ScaledMatrix CocycleSystem::block(const BaseSystem::Canon& c, int k, int level, std::int64_t q) const {
    Cache::Key key{c.root_digest, k, level, q};
    {
        std::shared_lock lock(cache_->mu);
        auto it = cache_->map.find(key);
        if (it != cache_->map.end()) {
            ++cache_->hits;
            return it->second;
        }
    }
    ++cache_->misses;
    ScaledMatrix out;
    if (level == 0) {
        out = leaf(c, k, q);
    } else {
        ScaledMatrix first = block(c, k, level - 1, 2 * q);
        ScaledMatrix second = block(c, k, level - 1, 2 * q + 1);
        out = multiply(second, first);
    }
    std::unique_lock lock(cache_->mu);
    if (cache_->map.size() >= cache_->limit) cache_->map.clear();
    cache_->map.insert_or_assign(key, out);
    return out;
}

namespace {

ScaledMatrix interval_product(std::int64_t A, std::int64_t B, Eigen::Index n,
                              const std::function<ScaledMatrix(int, std::int64_t)>& blk) {
    ScaledMatrix acc;
    acc.m = Mat::Identity(n, n);
    while (A < B) {
        int j = 0;
        while (j < 60) {
            std::int64_t size = std::int64_t{1} << (j + 1);
            if ((A & (size - 1)) != 0 || B - A < size) break;
            ++j;
        }
        acc = multiply(blk(j, A >> j), acc);
        A += std::int64_t{1} << j;
    }
    return acc;
}

}  // namespace

ScaledMatrix CocycleSystem::evaluate_interval(const BasePoint& w, std::int64_t a, std::int64_t b) const {
    if (a > b) throw std::invalid_argument("evaluate_interval: need a <= b");
    auto c = base_.canonical(w);
    return interval_product(c.tau + a, c.tau + b, dim(),
                            [&](int j, std::int64_t q) { return block(c, 0, j, q); });
}

ScaledMatrix CocycleSystem::compound_interval(const BasePoint& w, std::int64_t a, std::int64_t b, int k) const {
    if (a > b) throw std::invalid_argument("compound_interval: need a <= b");
    if (k < 1 || k > dim()) throw std::invalid_argument("compound_interval: k out of range");
    auto c = base_.canonical(w);
    const auto N = static_cast<Eigen::Index>(subsets(dim(), k).size());
    return interval_product(c.tau + a, c.tau + b, N, [&](int j, std::int64_t q) { return block(c, k, j, q); });
}

double CocycleSystem::log_norm(const BasePoint& w, std::int64_t a, std::int64_t b) const {
    return evaluate_interval(w, a, b).log_norm(norm_);
}

double CocycleSystem::log_sv_sum(const BasePoint& w, std::int64_t a, std::int64_t b, int k) const {
    ScaledMatrix s = compound_interval(w, a, b, k);
    if (s.is_zero()) return kNegInf;
    Eigen::JacobiSVD<Mat> svd(s.m);
    double top = svd.singularValues()(0);
    return top == 0.0 ? kNegInf : s.log_scale + std::log(top);
}

CacheStats CocycleSystem::cache_stats() const {
    std::shared_lock lock(cache_->mu);
    return {cache_->hits.load(), cache_->misses.load(), cache_->map.size()};
}

void CocycleSystem::clear_cache() const {
    std::unique_lock lock(cache_->mu);
    cache_->map.clear();
}

void CocycleSystem::set_cache_limit(std::size_t entries) const {
    std::unique_lock lock(cache_->mu);
    cache_->limit = std::max<std::size_t>(entries, 16);
}

IntegrabilityEstimate integrability_estimate(const CocycleSystem& c, int samples, u64 seed) {
    if (samples < 1) throw std::invalid_argument("integrability_estimate: samples must be >= 1");
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        BasePoint w = c.base().sample(seed, static_cast<u64>(i));
        double v = std::max(0.0, std::log(operator_norm(c.at(w), c.norm())));
        sum += v;
        sq += v * v;
    }
    IntegrabilityEstimate e;
    e.samples = samples;
    e.mean = sum / samples;
    double var = samples > 1 ? std::max(0.0, (sq - samples * e.mean * e.mean) / (samples - 1)) : 0.0;
    e.stderr_ = std::sqrt(var / samples);
    return e;
}

}  // namespace metlab
