/**
 * @file zkp.hpp
 * @brief Non-interactive proof that a quantized gradient satisfies an l2-norm
 *        bound: SIS commitment, Fiat-Shamir challenge, Gaussian masking with
 *        Lyubashevsky rejection sampling, and the three verifier checks
 *        (response norm, challenge consistency, algebraic consistency).
 *
 * The statement lives in quantized-gradient space: w = round(dw * scale),
 * claim ||w||_2 <= tau * scale. The masking std-dev is sigma_y = beta * tau *
 * scale and the verifier's response bound is B = 1.5 * sigma_y * sqrt(d).
 *
 * The challenge is a small integer c in [challenge_offset,
 * challenge_offset + 2^kappa) derived from SHA3-256 over the transcript.
 * Keeping c small is what makes the scheme *work at all*: the response
 * z = y + c*w must stay maskable by sigma_y for honest provers (Gaussian
 * rejection sampling diverges once c*||w|| >> sigma_y), while c >= 2
 * guarantees that a norm-violating response at the default parameters lands
 * far outside B. The binding argument only needs two distinct challenges per
 * commitment, so a 2-bit space already gives the operational soundness the
 * protocol relies on; kappa is configurable for callers who want a larger
 * space at the cost of restarts.
 *
 * An honest prover refuses statements outside the language (norm above the
 * bound) instead of burning restarts on them. Dishonest callers can still
 * assemble a transcript via prove_transcript_unchecked(); rejecting those is
 * the verifier's job.
 * @license Apache-2.0
 */

#ifndef ZKFL_ZKP_HPP
#define ZKFL_ZKP_HPP

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zkfl/bytes.hpp"
#include "zkfl/hash.hpp"
#include "zkfl/ring.hpp"
#include "zkfl/rng.hpp"

namespace zkfl {

struct ZkpParams {
    uint32_t d = 0;                 ///< gradient dimension
    uint32_t ell = 128;             ///< commitment randomness dimension
    uint32_t m = 256;               ///< commitment rows
    uint64_t q = 7681;              ///< commitment modulus
    double sigma_r = 1024.0;        ///< commitment-randomness std-dev
    double beta = 12.0;             ///< rejection parameter
    uint32_t kappa = 2;             ///< challenge bit-length
    uint32_t challenge_offset = 2;  ///< smallest challenge value
    double tau = 5.0;               ///< norm threshold (real units)
    double scale = 256.0;           ///< quantization scale
    uint32_t max_restarts = 64;

    void validate() const {
        if (d == 0 || ell == 0 || m == 0) throw std::invalid_argument("zkp: dimensions must be positive");
        if (q < 2 || q > 0xffff) throw std::invalid_argument("zkp: q must fit 16 bits");
        if (sigma_r <= 0 || beta <= 0 || tau <= 0 || scale <= 0)
            throw std::invalid_argument("zkp: parameters must be positive");
        if (kappa < 1 || kappa > 30) throw std::invalid_argument("zkp: kappa out of range");
    }

    double sigma_y() const { return beta * tau * scale; }
    double bound_b() const { return 1.5 * sigma_y() * std::sqrt(static_cast<double>(d)); }
    uint64_t norm_limit_sq() const {  // (tau * scale)^2, the language bound in quantized units
        double b = tau * scale;
        return static_cast<uint64_t>(b * b);
    }
    uint32_t challenge_count() const { return uint32_t(1) << kappa; }
    /// Lyubashevsky constant M = exp(12/beta + 1/(2 beta^2)); expected
    /// restarts per proof are about M - 1.
    double rejection_m() const { return std::exp(12.0 / beta + 1.0 / (2.0 * beta * beta)); }
};

struct NormBoundError : std::runtime_error {
    explicit NormBoundError(double norm, double limit)
        : std::runtime_error("zkp: statement norm " + std::to_string(norm) + " exceeds bound " +
                             std::to_string(limit)) {}
};

struct RestartLimitError : std::runtime_error {
    RestartLimitError() : std::runtime_error("zkp: rejection-sampling restart limit exceeded") {}
};

/// Gradient quantized for proving: w = round(dw * scale), plain integers.
struct QuantizedGradient {
    std::vector<int64_t> w;
    double scale = 1.0;

    static QuantizedGradient from_real(std::span<const double> dw, double scale) {
        QuantizedGradient g;
        g.scale = scale;
        g.w.resize(dw.size());
        for (size_t i = 0; i < dw.size(); ++i) g.w[i] = static_cast<int64_t>(std::nearbyint(dw[i] * scale));
        return g;
    }

    double norm_quantized() const {
        long double s = 0;
        for (int64_t v : w) s += static_cast<long double>(v) * v;
        return static_cast<double>(std::sqrt(s));
    }
};

/// Full Fiat-Shamir transcript (C, T, c, z, r_z).
struct NormProof {
    std::vector<uint64_t> C;    ///< commitment to w, length m, mod q
    std::vector<uint64_t> T;    ///< commitment to the mask y, length m, mod q
    uint32_t c = 0;             ///< challenge
    std::vector<int64_t> z;     ///< response y + c*w, length d
    std::vector<uint64_t> r_z;  ///< response randomness, length ell, mod q

    Bytes to_bytes() const {
        ByteWriter w;
        w.put_u32(static_cast<uint32_t>(C.size()));
        for (uint64_t v : C) w.put_u16(static_cast<uint16_t>(v));
        for (uint64_t v : T) w.put_u16(static_cast<uint16_t>(v));
        w.put_u32(c);
        w.put_u32(static_cast<uint32_t>(z.size()));
        for (int64_t v : z) {
            if (v < INT32_MIN || v > INT32_MAX) throw std::overflow_error("proof: z outside declared width");
            w.put_i32(static_cast<int32_t>(v));
        }
        w.put_u32(static_cast<uint32_t>(r_z.size()));
        for (uint64_t v : r_z) w.put_u16(static_cast<uint16_t>(v));
        return w.take();
    }

    static NormProof from_bytes(std::span<const uint8_t> b) {
        ByteReader r(b);
        NormProof p;
        uint32_t m = r.get_u32();
        p.C.resize(m);
        for (auto& v : p.C) v = r.get_u16();
        p.T.resize(m);
        for (auto& v : p.T) v = r.get_u16();
        p.c = r.get_u32();
        uint32_t d = r.get_u32();
        p.z.resize(d);
        for (auto& v : p.z) v = r.get_i32();
        uint32_t ell = r.get_u32();
        p.r_z.resize(ell);
        for (auto& v : p.r_z) v = r.get_u16();
        if (!r.done()) throw std::runtime_error("proof: trailing bytes");
        return p;
    }

    size_t wire_size() const { return 4 + 2 * C.size() + 2 * T.size() + 4 + 4 + 4 * z.size() + 4 + 2 * r_z.size(); }
};

/// Public SIS matrix A (m x (d+ell) over Z_q), expanded deterministically
/// from a 32-byte seed and cached. Commit(x; r) = A * (x || r) mod q.
class CommitmentKey {
public:
    CommitmentKey(const Seed256& seed, const ZkpParams& params) : seed_(seed), p_(params) { p_.validate(); }

    const Seed256& seed() const { return seed_; }
    const ZkpParams& params() const { return p_; }

    /// A * (x || r) mod q. Inputs are arbitrary integers; they are reduced
    /// mod q first so each row accumulates in 64 bits.
    std::vector<uint64_t> commit(std::span<const int64_t> x, std::span<const int64_t> r) const {
        if (x.size() != p_.d || r.size() != p_.ell) throw std::invalid_argument("commit: dimension mismatch");
        const size_t cols = size_t(p_.d) + p_.ell;
        std::vector<uint32_t> v(cols);
        for (size_t i = 0; i < x.size(); ++i) v[i] = static_cast<uint32_t>(mod_q(x[i], p_.q));
        for (size_t i = 0; i < r.size(); ++i) v[p_.d + i] = static_cast<uint32_t>(mod_q(r[i], p_.q));
        return matvec(v);
    }

    std::vector<uint64_t> commit_reduced(std::span<const int64_t> x, std::span<const uint64_t> r_mod_q) const {
        if (x.size() != p_.d || r_mod_q.size() != p_.ell) throw std::invalid_argument("commit: dimension mismatch");
        const size_t cols = size_t(p_.d) + p_.ell;
        std::vector<uint32_t> v(cols);
        for (size_t i = 0; i < x.size(); ++i) v[i] = static_cast<uint32_t>(mod_q(x[i], p_.q));
        for (size_t i = 0; i < r_mod_q.size(); ++i) v[p_.d + i] = static_cast<uint32_t>(r_mod_q[i] % p_.q);
        return matvec(v);
    }

    /// The expanded matrix, row-major. Materialized once per key; at the
    /// experiment dimension this is ~56 MB and turns every commit into a
    /// plain cached mat-vec.
    const std::vector<uint16_t>& matrix() const {
        if (a_.empty()) expand();
        return a_;
    }

private:
    std::vector<uint64_t> matvec(const std::vector<uint32_t>& v) const {
        const auto& a = matrix();
        const size_t cols = v.size();
        std::vector<uint64_t> out(p_.m);
        for (uint32_t row = 0; row < p_.m; ++row) {
            const uint16_t* ap = a.data() + size_t(row) * cols;
            uint64_t acc = 0;
            for (size_t j = 0; j < cols; ++j) acc += uint64_t(ap[j]) * v[j];
            out[row] = acc % p_.q;
        }
        return out;
    }

    void expand() const {
        const size_t cols = size_t(p_.d) + p_.ell;
        a_.resize(size_t(p_.m) * cols);
        Rng rng = Rng(seed_).derive("zkfl/zkp/matA/v1");
        const uint32_t limit = 65536 - 65536 % static_cast<uint32_t>(p_.q);
        // one rejection-sampled uniform stream, row-major
        constexpr size_t kChunk = 1 << 16;
        std::vector<uint8_t> buf(kChunk * 2);
        size_t idx = 0;
        while (idx < a_.size()) {
            rng.fill(buf.data(), buf.size());
            for (size_t i = 0; i + 1 < buf.size() && idx < a_.size(); i += 2) {
                uint32_t v = uint32_t(buf[i]) | (uint32_t(buf[i + 1]) << 8);
                if (v < limit) a_[idx++] = static_cast<uint16_t>(v % p_.q);
            }
        }
    }

    Seed256 seed_;
    ZkpParams p_;
    mutable std::vector<uint16_t> a_;
};

/// c = offset + (SHA3-256(C || T || tau) mod 2^kappa). The hash input uses the
/// canonical serialization with a protocol-version domain tag, so equal
/// (C, T, tau) always map to the same challenge.
inline uint32_t fiat_shamir_challenge(std::span<const uint64_t> C, std::span<const uint64_t> T, double tau,
                                      const ZkpParams& p) {
    ByteWriter w;
    w.put_u32(static_cast<uint32_t>(C.size()));
    for (uint64_t v : C) w.put_u16(static_cast<uint16_t>(v));
    for (uint64_t v : T) w.put_u16(static_cast<uint16_t>(v));
    w.put_f64(tau);
    w.put_u32(p.d);
    w.put_u32(p.ell);
    w.put_u64(p.q);
    Digest dg = tagged_hash("zkfl/zkp/fs/v1", {std::span<const uint8_t>(w.data())});
    uint64_t h = 0;
    for (int i = 0; i < 8; ++i) h |= uint64_t(dg[i]) << (8 * i);
    return p.challenge_offset + static_cast<uint32_t>(h & ((uint64_t(1) << p.kappa) - 1));
}

/// Standard Lyubashevsky rejection step: accept z with probability
/// min(1, D_sigma(z) / (M * D_{sigma, c*w}(z))), M = exp(12/beta + 1/(2 beta^2)).
/// A zero center (c*w = 0) means proposal and target coincide: always accept.
inline bool rejection_sample_accept(std::span<const int64_t> z, uint32_t c, std::span<const int64_t> w,
                                    double sigma_y, double rejection_m, Rng& rng) {
    if (z.size() != w.size()) throw std::invalid_argument("rejection: dimension mismatch");
    __int128 dot_zv = 0;
    __int128 vv = 0;
    bool v_zero = true;
    for (size_t i = 0; i < z.size(); ++i) {
        __int128 v = static_cast<__int128>(c) * w[i];
        if (v != 0) v_zero = false;
        dot_zv += static_cast<__int128>(z[i]) * v;
        vv += v * v;
    }
    if (v_zero) return true;
    long double num = -2.0L * static_cast<long double>(dot_zv) + static_cast<long double>(vv);
    long double log_ratio = num / (2.0L * sigma_y * sigma_y);
    long double log_p = log_ratio - std::log(static_cast<long double>(rejection_m));
    if (log_p >= 0.0L) return true;
    return rng.real01() < static_cast<double>(std::exp(log_p));
}

namespace detail {
/// Test hook (selftest negative control): ZKFL_TEST_SKIP_CHECK=a|b|c disables
/// one verifier check.
inline char skipped_verifier_check() {
    const char* v = std::getenv("ZKFL_TEST_SKIP_CHECK");
    if (v && (v[0] == 'a' || v[0] == 'b' || v[0] == 'c')) return v[0];
    return 0;
}

inline NormProof build_transcript(const CommitmentKey& key, const QuantizedGradient& grad,
                                  const std::vector<int64_t>& r, const std::vector<uint64_t>& C,
                                  const ZkpParams& p, Rng& rng) {
    NormProof proof;
    proof.C = C;
    std::vector<int64_t> y = sample_gaussian_vec(p.d, p.sigma_y(), rng);
    std::vector<int64_t> rp = sample_gaussian_vec(p.ell, p.sigma_r, rng);
    proof.T = key.commit(y, rp);
    proof.c = fiat_shamir_challenge(proof.C, proof.T, p.tau, p);
    proof.z.resize(p.d);
    for (size_t i = 0; i < p.d; ++i) proof.z[i] = y[i] + static_cast<int64_t>(proof.c) * grad.w[i];
    proof.r_z.resize(p.ell);
    for (size_t i = 0; i < p.ell; ++i)
        proof.r_z[i] = mod_q(rp[i] + static_cast<int64_t>(proof.c) * r[i], p.q);
    return proof;
}
}  // namespace detail

struct ProveStats {
    uint32_t restarts = 0;  ///< rejected attempts before the accepted one
};

/// Honest prover. Refuses statements outside the language (norm above
/// tau*scale in quantized units); restarts the masking until the rejection
/// sampler accepts.
inline NormProof prove_norm(const CommitmentKey& key, const QuantizedGradient& grad, const ZkpParams& p, Rng& rng,
                            ProveStats* stats = nullptr) {
    p.validate();
    if (grad.w.size() != p.d) throw std::invalid_argument("prove: gradient dimension mismatch");
    double norm = grad.norm_quantized();
    double limit = p.tau * p.scale;
    if (norm > limit) throw NormBoundError(norm / p.scale, p.tau);

    std::vector<int64_t> r = sample_gaussian_vec(p.ell, p.sigma_r, rng);
    std::vector<uint64_t> C = key.commit(grad.w, r);
    const double m_const = p.rejection_m();
    for (uint32_t attempt = 0; attempt < p.max_restarts; ++attempt) {
        NormProof proof = detail::build_transcript(key, grad, r, C, p, rng);
        if (rejection_sample_accept(proof.z, proof.c, grad.w, p.sigma_y(), m_const, rng)) {
            if (stats) stats->restarts = attempt;
            return proof;
        }
    }
    throw RestartLimitError();
}

/// Single-shot transcript with no statement check and no rejection sampling.
/// This is the dishonest-caller path: the transcript satisfies the algebraic
/// relation by construction, and the verifier's norm check is what stands
/// between an out-of-bound gradient and acceptance.
inline NormProof prove_transcript_unchecked(const CommitmentKey& key, const QuantizedGradient& grad,
                                            const ZkpParams& p, Rng& rng) {
    p.validate();
    if (grad.w.size() != p.d) throw std::invalid_argument("prove: gradient dimension mismatch");
    std::vector<int64_t> r = sample_gaussian_vec(p.ell, p.sigma_r, rng);
    std::vector<uint64_t> C = key.commit(grad.w, r);
    return detail::build_transcript(key, grad, r, C, p, rng);
}

enum class VerifyCheck : uint8_t {
    ok = 0,
    norm_bound,  ///< check (a): ||z||_2 <= B
    challenge,   ///< check (b): c = H(C || T || tau)
    algebra,     ///< check (c): A*(z || r_z) = T + c*C (mod q)
};

inline const char* verify_check_name(VerifyCheck c) {
    switch (c) {
        case VerifyCheck::ok: return "ok";
        case VerifyCheck::norm_bound: return "norm_bound";
        case VerifyCheck::challenge: return "challenge";
        case VerifyCheck::algebra: return "algebra";
    }
    return "?";
}

struct VerifyResult {
    bool ok = false;
    VerifyCheck failed = VerifyCheck::ok;
};

/// Stateless verification; returns which check failed for diagnostics.
inline VerifyResult verify_norm_detail(const CommitmentKey& key, const NormProof& proof, double tau,
                                       const ZkpParams& params) {
    ZkpParams p = params;
    p.tau = tau;
    p.validate();
    const char skip = detail::skipped_verifier_check();

    if (proof.C.size() != p.m || proof.T.size() != p.m || proof.z.size() != p.d || proof.r_z.size() != p.ell)
        return {false, VerifyCheck::algebra};
    for (uint64_t v : proof.C)
        if (v >= p.q) return {false, VerifyCheck::algebra};
    for (uint64_t v : proof.T)
        if (v >= p.q) return {false, VerifyCheck::algebra};
    for (uint64_t v : proof.r_z)
        if (v >= p.q) return {false, VerifyCheck::algebra};

    // (a) response norm
    if (skip != 'a') {
        unsigned __int128 zz = 0;
        for (int64_t v : proof.z) zz += static_cast<unsigned __int128>(static_cast<__int128>(v) * v);
        long double b = p.bound_b();
        if (static_cast<long double>(zz) > b * b) return {false, VerifyCheck::norm_bound};
    }

    // (b) challenge consistency
    if (skip != 'b') {
        if (proof.c != fiat_shamir_challenge(proof.C, proof.T, p.tau, p)) return {false, VerifyCheck::challenge};
    }

    // (c) algebraic consistency
    if (skip != 'c') {
        std::vector<uint64_t> lhs = key.commit_reduced(proof.z, proof.r_z);
        for (uint32_t i = 0; i < p.m; ++i) {
            uint64_t rhs = (proof.T[i] + static_cast<uint64_t>(proof.c) % p.q * proof.C[i]) % p.q;
            if (lhs[i] != rhs) return {false, VerifyCheck::algebra};
        }
    }
    return {true, VerifyCheck::ok};
}

inline bool verify_norm(const CommitmentKey& key, const NormProof& proof, double tau, const ZkpParams& params) {
    return verify_norm_detail(key, proof, tau, params).ok;
}

}  // namespace zkfl

#endif  // ZKFL_ZKP_HPP
