/**
 * @file he.hpp
 * @brief Additive-only BFV homomorphic encryption with fixed-point gradient
 *        encoding and the noise-budget predicate that bounds how many
 *        ciphertexts may be summed.
 *
 * Parameters default to n=512, q=2^32-5, t=2^16, sigma=3.2. Secrets and
 * encryption ephemerals are ternary uniform; errors are discrete Gaussian.
 * q is not NTT-friendly; multiplication is schoolbook (ring.hpp), whose
 * 128-bit accumulator covers n*(q-1)^2.
 *
 * Only addition is supported: the aggregation protocol never multiplies
 * ciphertexts, so there is no relinearization or modulus switching here.
 * @license Apache-2.0
 */

#ifndef ZKFL_HE_HPP
#define ZKFL_HE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "zkfl/ring.hpp"
#include "zkfl/rng.hpp"

namespace zkfl {

struct BfvParams {
    RingParams ring{512, (uint64_t(1) << 32) - 5};
    uint64_t t = uint64_t(1) << 16;  ///< plaintext modulus
    double sigma = 3.2;              ///< error std-dev

    static BfvParams standard() { return BfvParams{}; }

    uint64_t delta() const { return ring.q / t; }  ///< scaling factor floor(q/t)

    void validate() const {
        ring.validate();
        if (t >= ring.q) throw std::invalid_argument("bfv: t must be < q");
        if (sigma <= 0) throw std::invalid_argument("bfv: sigma must be positive");
    }
};

struct BfvPublicKey {
    RingElement p0;  ///< -(a*s + e)
    RingElement p1;  ///< a
};

struct BfvSecretKey {
    RingElement s;
};

struct BfvKeyPair {
    BfvPublicKey pk;
    BfvSecretKey sk;
};

/// Ciphertext pair; `adds` counts how many fresh encryptions it absorbs
/// (a fresh ciphertext has adds = 1).
struct HeCiphertext {
    RingElement c0;
    RingElement c1;
    uint32_t adds = 1;

    /// Wire layout: c0 || c1 coefficient encodings.
    Bytes to_bytes() const {
        Bytes out = c0.to_bytes();
        Bytes b1 = c1.to_bytes();
        out.insert(out.end(), b1.begin(), b1.end());
        return out;
    }

    static HeCiphertext from_bytes(const BfvParams& p, std::span<const uint8_t> b, uint32_t adds = 1) {
        size_t per = size_t(p.ring.n) * p.ring.coeff_bytes();
        if (b.size() != 2 * per) throw std::runtime_error("bfv ct: bad serialized length");
        return HeCiphertext{RingElement::from_bytes(p.ring, b.subspan(0, per)),
                            RingElement::from_bytes(p.ring, b.subspan(per)), adds};
    }
};

/// Fixed-point encoded plaintext chunk: values in [0, t), at most n of them.
struct QuantizedBlock {
    std::vector<uint64_t> values;
    double scale = 1.0;
};

/// Theorem-style additive noise budget: N summed ciphertexts decrypt exactly
/// while N * (2*sigma + 1) * n < q / (2t).
inline bool check_noise_budget(uint64_t n_adds, const BfvParams& p) {
    if (n_adds < 1) throw std::invalid_argument("bfv: addition count must be >= 1");
    double lhs = static_cast<double>(n_adds) * (2.0 * p.sigma + 1.0) * static_cast<double>(p.ring.n);
    double rhs = static_cast<double>(p.ring.q) / (2.0 * static_cast<double>(p.t));
    return lhs < rhs;
}

/// Largest N the budget admits (used to fail fast at aggregation time).
inline uint64_t max_budget_adds(const BfvParams& p) {
    uint64_t n = 1;
    while (check_noise_budget(n + 1, p)) ++n;
    return n;
}

inline RingElement sample_ternary(RingParams p, Rng& rng) {
    std::vector<int64_t> v(p.n);
    for (uint32_t i = 0; i < p.n; ++i) {
        // uniform over {-1, 0, 1} via 2-bit rejection
        for (;;) {
            uint8_t b = rng.u8() & 3;
            if (b < 3) {
                v[i] = static_cast<int64_t>(b) - 1;
                break;
            }
        }
    }
    return RingElement::from_signed(p, v);
}

inline RingElement sample_error(const BfvParams& p, Rng& rng) {
    auto v = sample_gaussian_vec(p.ring.n, p.sigma, rng);
    return RingElement::from_signed(p.ring, v);
}

/// p0 = -(a*s + e), p1 = a with ternary s and Gaussian e.
inline BfvKeyPair bfv_keygen(const BfvParams& p, Rng& rng) {
    p.validate();
    RingElement a = sample_uniform(p.ring, rng);
    RingElement s = sample_ternary(p.ring, rng);
    RingElement e = sample_error(p, rng);
    RingElement p0 = ring_neg(ring_add(ring_mul(a, s), e));
    return BfvKeyPair{BfvPublicKey{std::move(p0), std::move(a)}, BfvSecretKey{std::move(s)}};
}

/// c0 = p0*u + e0 + encode(m), c1 = p1*u + e1 with fresh u, e0, e1.
/// encode(m) = round(m*q/t) per coefficient: with q mod t != 0 the plain
/// floor(q/t)*m form carries an m-dependent error term (q mod t)*m/q that
/// breaks exact decryption at large m, so the scaling is rounded instead.
inline HeCiphertext bfv_encrypt(const BfvParams& p, const BfvPublicKey& pk, const QuantizedBlock& m, Rng& rng) {
    if (m.values.size() > p.ring.n) throw std::invalid_argument("bfv: plaintext block longer than n");
    std::vector<uint64_t> mc(p.ring.n, 0);
    for (size_t i = 0; i < m.values.size(); ++i) {
        if (m.values[i] >= p.t) throw std::invalid_argument("bfv: plaintext value out of range");
        unsigned __int128 num = static_cast<unsigned __int128>(m.values[i]) * p.ring.q + p.t / 2;
        mc[i] = static_cast<uint64_t>(num / p.t) % p.ring.q;
    }
    RingElement dm(p.ring, std::move(mc));
    RingElement u = sample_ternary(p.ring, rng);
    RingElement e0 = sample_error(p, rng);
    RingElement e1 = sample_error(p, rng);
    RingElement c0 = ring_add(ring_add(ring_mul(pk.p0, u), e0), dm);
    RingElement c1 = ring_add(ring_mul(pk.p1, u), e1);
    return HeCiphertext{std::move(c0), std::move(c1), 1};
}

/// Component-wise sum; the combined addition count must stay inside the
/// noise budget.
inline HeCiphertext bfv_add(const BfvParams& p, const HeCiphertext& a, const HeCiphertext& b) {
    if (a.c0.params() != p.ring || b.c0.params() != p.ring)
        throw std::invalid_argument("bfv: parameter mismatch");
    uint32_t adds = a.adds + b.adds;
    if (!check_noise_budget(adds, p)) throw std::runtime_error("bfv: noise budget exceeded");
    return HeCiphertext{ring_add(a.c0, b.c0), ring_add(a.c1, b.c1), adds};
}

/// Round t*(c0 + c1*s)/q per coefficient, mod t.
inline QuantizedBlock bfv_decrypt(const BfvParams& p, const BfvSecretKey& sk, const HeCiphertext& ct,
                                  double scale = 1.0) {
    RingElement v = ring_add(ct.c0, ring_mul(ct.c1, sk.s));
    QuantizedBlock out;
    out.scale = scale;
    out.values.resize(p.ring.n);
    const unsigned __int128 q = p.ring.q;
    for (uint32_t i = 0; i < p.ring.n; ++i) {
        unsigned __int128 num = static_cast<unsigned __int128>(v.coeff(i)) * p.t + q / 2;
        out.values[i] = static_cast<uint64_t>(num / q) % p.t;
    }
    return out;
}

/// Centered fixed-point encoding round(x*scale) mod t, chunked into blocks of
/// at most `block_len` values. Values must satisfy |x*scale| < t/2.
inline std::vector<QuantizedBlock> quantize_gradient(std::span<const double> x, double scale, uint64_t t,
                                                     size_t block_len) {
    if (scale <= 0) throw std::invalid_argument("quantize: scale must be positive");
    if (block_len == 0) throw std::invalid_argument("quantize: block length must be positive");
    std::vector<QuantizedBlock> blocks;
    const double half = static_cast<double>(t) / 2.0;
    QuantizedBlock cur;
    cur.scale = scale;
    for (double v : x) {
        double q = std::nearbyint(v * scale);
        if (std::fabs(q) >= half) throw std::overflow_error("quantize: value exceeds representable range");
        int64_t iv = static_cast<int64_t>(q);
        cur.values.push_back(mod_q(iv, t));
        if (cur.values.size() == block_len) {
            blocks.push_back(std::move(cur));
            cur = QuantizedBlock{};
            cur.scale = scale;
        }
    }
    if (!cur.values.empty()) blocks.push_back(std::move(cur));
    return blocks;
}

inline uint64_t quantize_value(double v, double scale, uint64_t t) {
    double q = std::nearbyint(v * scale);
    if (std::fabs(q) >= static_cast<double>(t) / 2.0)
        throw std::overflow_error("quantize: value exceeds representable range");
    return mod_q(static_cast<int64_t>(q), t);
}

/// Centered lift of mod-t sums, then divide by scale * n_contributors.
/// Precondition (enforced by the caller's norm discipline): the true sum
/// stays inside (-t/2, t/2) in quantized units, so the lift cannot wrap.
inline std::vector<double> dequantize_sum(std::span<const QuantizedBlock> blocks, double scale,
                                          uint64_t n_contributors, uint64_t t) {
    if (n_contributors == 0) throw std::invalid_argument("dequantize: contributor count must be >= 1");
    std::vector<double> out;
    for (const auto& b : blocks)
        for (uint64_t v : b.values)
            out.push_back(static_cast<double>(centered(v % t, t)) / (scale * static_cast<double>(n_contributors)));
    return out;
}

}  // namespace zkfl

#endif  // ZKFL_HE_HPP
