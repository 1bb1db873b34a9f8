/**
 * @file ring.hpp
 * @brief Arithmetic over the negacyclic ring Z_q[X]/(X^n + 1) plus the noise
 *        samplers (uniform, centered binomial, discrete Gaussian) used by the
 *        KEM, HE and commitment layers.
 *
 * Multiplication is schoolbook O(n^2) with 128-bit accumulation; coefficients
 * are stored in the canonical range [0, q). A centered view [-q/2, q/2) is
 * provided for norm computations.
 * @license Apache-2.0
 */

#ifndef ZKFL_RING_HPP
#define ZKFL_RING_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "zkfl/bytes.hpp"
#include "zkfl/rng.hpp"

namespace zkfl {

struct RingParams {
    uint32_t n = 0;  ///< ring degree, power of two
    uint64_t q = 0;  ///< coefficient modulus

    RingParams() = default;
    RingParams(uint32_t n_, uint64_t q_) : n(n_), q(q_) { validate(); }

    void validate() const {
        if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("ring: n must be a power of 2");
        if (q < 2) throw std::invalid_argument("ring: q must be >= 2");
        // schoolbook accumulation must fit the 128-bit accumulator: n*(q-1)^2 < 2^127
        long double worst = static_cast<long double>(n) * static_cast<long double>(q - 1) *
                            static_cast<long double>(q - 1);
        if (worst >= std::ldexp(1.0L, 127)) throw std::invalid_argument("ring: q too large for accumulator");
    }

    /// Bytes per coefficient in the canonical serialization.
    uint32_t coeff_bytes() const {
        uint32_t bits = 0;
        uint64_t v = q - 1;
        while (v > 0) {
            ++bits;
            v >>= 1;
        }
        if (bits == 0) bits = 1;
        return (bits + 7) / 8;
    }

    bool operator==(const RingParams& o) const { return n == o.n && q == o.q; }
    bool operator!=(const RingParams& o) const { return !(*this == o); }
};

/// Map a canonical coefficient to the centered representative in [-q/2, q/2).
inline int64_t centered(uint64_t v, uint64_t q) {
    return v >= (q + 1) / 2 ? static_cast<int64_t>(v) - static_cast<int64_t>(q) : static_cast<int64_t>(v);
}

/// Reduce an arbitrary signed integer into [0, q).
inline uint64_t mod_q(int64_t v, uint64_t q) {
    int64_t m = v % static_cast<int64_t>(q);
    if (m < 0) m += static_cast<int64_t>(q);
    return static_cast<uint64_t>(m);
}

class RingElement {
public:
    RingElement() = default;
    RingElement(RingParams p, std::vector<uint64_t> coeffs) : params_(p), c_(std::move(coeffs)) {
        if (c_.size() != params_.n) throw std::invalid_argument("ring element: wrong coefficient count");
        for (uint64_t v : c_)
            if (v >= params_.q) throw std::invalid_argument("ring element: coefficient not reduced");
    }

    static RingElement zero(RingParams p) { return RingElement(p, std::vector<uint64_t>(p.n, 0)); }

    /// The monomial X^k (k < n).
    static RingElement monomial(RingParams p, uint32_t k, uint64_t coeff = 1) {
        if (k >= p.n) throw std::invalid_argument("ring element: monomial degree out of range");
        std::vector<uint64_t> c(p.n, 0);
        c[k] = coeff % p.q;
        return RingElement(p, std::move(c));
    }

    /// Build from centered/unreduced signed coefficients.
    static RingElement from_signed(RingParams p, std::span<const int64_t> v) {
        if (v.size() != p.n) throw std::invalid_argument("ring element: wrong coefficient count");
        std::vector<uint64_t> c(p.n);
        for (size_t i = 0; i < v.size(); ++i) c[i] = mod_q(v[i], p.q);
        return RingElement(p, std::move(c));
    }

    const RingParams& params() const { return params_; }
    const std::vector<uint64_t>& coeffs() const { return c_; }
    uint64_t coeff(size_t i) const { return c_.at(i); }
    uint32_t n() const { return params_.n; }
    uint64_t q() const { return params_.q; }

    std::vector<int64_t> centered_coeffs() const {
        std::vector<int64_t> out(c_.size());
        for (size_t i = 0; i < c_.size(); ++i) out[i] = centered(c_[i], params_.q);
        return out;
    }

    int64_t inf_norm_centered() const {
        int64_t m = 0;
        for (uint64_t v : c_) {
            int64_t a = centered(v, params_.q);
            if (a < 0) a = -a;
            if (a > m) m = a;
        }
        return m;
    }

    /// Canonical little-endian serialization: n coefficients of coeff_bytes() each.
    Bytes to_bytes() const {
        uint32_t w = params_.coeff_bytes();
        Bytes out;
        out.reserve(size_t(params_.n) * w);
        for (uint64_t v : c_)
            for (uint32_t b = 0; b < w; ++b) out.push_back(static_cast<uint8_t>(v >> (8 * b)));
        return out;
    }

    static RingElement from_bytes(RingParams p, std::span<const uint8_t> b) {
        uint32_t w = p.coeff_bytes();
        if (b.size() != size_t(p.n) * w) throw std::runtime_error("ring element: bad serialized length");
        std::vector<uint64_t> c(p.n);
        for (uint32_t i = 0; i < p.n; ++i) {
            uint64_t v = 0;
            for (uint32_t k = 0; k < w; ++k) v |= uint64_t(b[size_t(i) * w + k]) << (8 * k);
            if (v >= p.q) throw std::runtime_error("ring element: coefficient out of range");
            c[i] = v;
        }
        return RingElement(p, std::move(c));
    }

    bool operator==(const RingElement& o) const { return params_ == o.params_ && c_ == o.c_; }
    bool operator!=(const RingElement& o) const { return !(*this == o); }

private:
    RingParams params_;
    std::vector<uint64_t> c_;
};

inline void require_same_params(const RingElement& a, const RingElement& b) {
    if (a.params() != b.params()) throw std::invalid_argument("ring: parameter mismatch");
}

inline RingElement ring_add(const RingElement& a, const RingElement& b) {
    require_same_params(a, b);
    const uint64_t q = a.q();
    std::vector<uint64_t> c(a.n());
    for (size_t i = 0; i < c.size(); ++i) {
        uint64_t v = a.coeff(i) + b.coeff(i);
        if (v >= q) v -= q;
        c[i] = v;
    }
    return RingElement(a.params(), std::move(c));
}

inline RingElement ring_sub(const RingElement& a, const RingElement& b) {
    require_same_params(a, b);
    const uint64_t q = a.q();
    std::vector<uint64_t> c(a.n());
    for (size_t i = 0; i < c.size(); ++i) {
        uint64_t av = a.coeff(i), bv = b.coeff(i);
        c[i] = av >= bv ? av - bv : av + q - bv;
    }
    return RingElement(a.params(), std::move(c));
}

inline RingElement ring_neg(const RingElement& a) { return ring_sub(RingElement::zero(a.params()), a); }

/// Schoolbook negacyclic product: degrees >= n fold back with a sign flip
/// (X^n = -1). Accumulates in signed 128-bit.
inline RingElement ring_mul(const RingElement& a, const RingElement& b) {
    require_same_params(a, b);
    const uint32_t n = a.n();
    const uint64_t q = a.q();
    std::vector<__int128> acc(n, 0);
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t ai = a.coeff(i);
        if (ai == 0) continue;
        for (uint32_t j = 0; j < n; ++j) {
            uint64_t bj = b.coeff(j);
            if (bj == 0) continue;
            __int128 p = static_cast<__int128>(ai) * bj;
            uint32_t k = i + j;
            if (k < n)
                acc[k] += p;
            else
                acc[k - n] -= p;
        }
    }
    std::vector<uint64_t> c(n);
    const __int128 qq = q;
    for (uint32_t k = 0; k < n; ++k) {
        __int128 v = acc[k] % qq;
        if (v < 0) v += qq;
        c[k] = static_cast<uint64_t>(v);
    }
    return RingElement(a.params(), std::move(c));
}

inline RingElement ring_scalar_mul(const RingElement& a, uint64_t s) {
    const uint64_t q = a.q();
    s %= q;
    std::vector<uint64_t> c(a.n());
    for (size_t i = 0; i < c.size(); ++i)
        c[i] = static_cast<uint64_t>((static_cast<unsigned __int128>(a.coeff(i)) * s) % q);
    return RingElement(a.params(), std::move(c));
}

/// Uniform element: each coefficient i.i.d. uniform in [0, q), by rejection
/// on fixed-width draws from the stream (no modulo bias).
inline RingElement sample_uniform(RingParams p, Rng& rng) {
    const uint32_t w = p.coeff_bytes();
    const uint64_t range = w >= 8 ? 0 : (uint64_t(1) << (8 * w));  // 0 means 2^64
    uint64_t limit;
    if (range == 0)
        limit = UINT64_MAX - UINT64_MAX % p.q;
    else
        limit = range - range % p.q;
    std::vector<uint64_t> c(p.n);
    for (uint32_t i = 0; i < p.n; ++i) {
        for (;;) {
            uint64_t v = 0;
            uint8_t b[8];
            rng.fill(b, w);
            for (uint32_t k = 0; k < w; ++k) v |= uint64_t(b[k]) << (8 * k);
            if (v < limit) {
                c[i] = v % p.q;
                break;
            }
        }
    }
    return RingElement(p, std::move(c));
}

/// Centered binomial: each coefficient is sum_{j<eta}(b_j - b'_j) for fair
/// bits b, b', stored mod q.
inline RingElement sample_cbd(RingParams p, uint32_t eta, Rng& rng) {
    if (eta < 1) throw std::invalid_argument("cbd: eta must be >= 1");
    std::vector<int64_t> v(p.n);
    uint64_t bitbuf = 0;
    uint32_t bits_left = 0;
    auto next_bit = [&]() -> uint32_t {
        if (bits_left == 0) {
            bitbuf = rng.u64();
            bits_left = 64;
        }
        uint32_t b = bitbuf & 1;
        bitbuf >>= 1;
        --bits_left;
        return b;
    };
    for (uint32_t i = 0; i < p.n; ++i) {
        int64_t s = 0;
        for (uint32_t j = 0; j < eta; ++j) s += static_cast<int64_t>(next_bit()) - static_cast<int64_t>(next_bit());
        v[i] = s;
    }
    return RingElement::from_signed(p, v);
}

/// Discrete Gaussian D_{Z,sigma}: continuous N(0, sigma^2) proposal rounded
/// to the nearest integer, corrected by exact rejection. Truncated at 10*sigma
/// (mass beyond the cutoff is negligible at the sigmas used here).
inline std::vector<int64_t> sample_gaussian_vec(size_t dim, double sigma, Rng& rng) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian: sigma must be positive");
    std::vector<int64_t> out;
    out.reserve(dim);
    const double cut = 10.0 * sigma;
    const double two_s2 = 2.0 * sigma * sigma;
    // sup over the proposal of (g^2 - z^2) is below 10*sigma + 0.25
    const double log_m = (10.0 * sigma + 0.25) / two_s2;
    while (out.size() < dim) {
        double g = rng.gaussian() * sigma;
        if (std::fabs(g) > cut) continue;
        double zr = std::nearbyint(g);
        int64_t z = static_cast<int64_t>(zr);
        double log_acc = (g * g - zr * zr) / two_s2 - log_m;
        if (log_acc >= 0.0 || rng.real01() < std::exp(log_acc)) out.push_back(z);
    }
    return out;
}

/// Vector of k ring elements sharing one RingParams.
struct ModuleVector {
    std::vector<RingElement> elems;

    ModuleVector() = default;
    explicit ModuleVector(std::vector<RingElement> e) : elems(std::move(e)) {
        if (elems.empty()) throw std::invalid_argument("module vector: must have k >= 1");
        for (const auto& x : elems)
            if (x.params() != elems[0].params()) throw std::invalid_argument("module vector: mixed params");
    }

    size_t k() const { return elems.size(); }
    const RingParams& params() const { return elems.at(0).params(); }

    Bytes to_bytes() const {
        Bytes out;
        for (const auto& e : elems) {
            Bytes b = e.to_bytes();
            out.insert(out.end(), b.begin(), b.end());
        }
        return out;
    }

    static ModuleVector from_bytes(RingParams p, size_t k, std::span<const uint8_t> b) {
        size_t per = size_t(p.n) * p.coeff_bytes();
        if (b.size() != per * k) throw std::runtime_error("module vector: bad serialized length");
        std::vector<RingElement> e;
        e.reserve(k);
        for (size_t i = 0; i < k; ++i) e.push_back(RingElement::from_bytes(p, b.subspan(i * per, per)));
        return ModuleVector(std::move(e));
    }

    bool operator==(const ModuleVector& o) const { return elems == o.elems; }
};

inline ModuleVector module_add(const ModuleVector& a, const ModuleVector& b) {
    if (a.k() != b.k()) throw std::invalid_argument("module: rank mismatch");
    std::vector<RingElement> e;
    e.reserve(a.k());
    for (size_t i = 0; i < a.k(); ++i) e.push_back(ring_add(a.elems[i], b.elems[i]));
    return ModuleVector(std::move(e));
}

/// Inner product <a, b> = sum_i a_i * b_i in R_q.
inline RingElement module_dot(const ModuleVector& a, const ModuleVector& b) {
    if (a.k() != b.k()) throw std::invalid_argument("module: rank mismatch");
    RingElement acc = RingElement::zero(a.params());
    for (size_t i = 0; i < a.k(); ++i) acc = ring_add(acc, ring_mul(a.elems[i], b.elems[i]));
    return acc;
}

}  // namespace zkfl

#endif  // ZKFL_RING_HPP
