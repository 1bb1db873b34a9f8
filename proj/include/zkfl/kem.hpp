/**
 * @file kem.hpp
 * @brief MLWE key encapsulation at Kyber-768-style parameters
 *        (n=256, k=3, q=3329, CBD eta=2).
 *
 * Keygen follows the textbook MLWE shape: t = A*s + e with A expanded from a
 * 32-byte public seed. Encaps/decaps are the standard MLWE encryption of a
 * random 256-bit message with per-coefficient rounding; the session key is
 * SHA3-256 of the message polynomial's canonical serialization. There is no
 * ciphertext compression and no FO transform; a decapsulation mismatch
 * surfaces downstream as an AEAD authentication failure.
 * @license Apache-2.0
 */

#ifndef ZKFL_KEM_HPP
#define ZKFL_KEM_HPP

#include <array>
#include <utility>

#include "zkfl/hash.hpp"
#include "zkfl/ring.hpp"
#include "zkfl/rng.hpp"

namespace zkfl {

struct KemParams {
    RingParams ring{256, 3329};
    uint32_t k = 3;
    uint32_t eta1 = 2;
    uint32_t eta2 = 2;

    static KemParams standard() { return KemParams{}; }

    void validate() const {
        ring.validate();
        if (k < 1) throw std::invalid_argument("kem: k must be >= 1");
    }
};

struct KemPublicKey {
    Seed256 a_seed{};  ///< seed for the k x k matrix A
    ModuleVector t;    ///< t = A*s + e

    /// Wire layout: 32-byte A-seed || t coefficients.
    Bytes to_bytes() const {
        Bytes out(a_seed.begin(), a_seed.end());
        Bytes tb = t.to_bytes();
        out.insert(out.end(), tb.begin(), tb.end());
        return out;
    }

    static KemPublicKey from_bytes(const KemParams& p, std::span<const uint8_t> b) {
        if (b.size() < 32) throw std::runtime_error("kem pk: truncated");
        KemPublicKey pk;
        std::copy(b.begin(), b.begin() + 32, pk.a_seed.begin());
        pk.t = ModuleVector::from_bytes(p.ring, p.k, b.subspan(32));
        return pk;
    }
};

struct KemSecretKey {
    ModuleVector s;
};

struct KemKeyPair {
    KemPublicKey ek;
    KemSecretKey dk;
};

struct KemCiphertext {
    ModuleVector u;
    RingElement v;

    /// Wire layout: u || v.
    Bytes to_bytes() const {
        Bytes out = u.to_bytes();
        Bytes vb = v.to_bytes();
        out.insert(out.end(), vb.begin(), vb.end());
        return out;
    }

    static KemCiphertext from_bytes(const KemParams& p, std::span<const uint8_t> b) {
        size_t per = size_t(p.ring.n) * p.ring.coeff_bytes();
        if (b.size() != per * (p.k + 1)) throw std::runtime_error("kem ct: bad serialized length");
        KemCiphertext ct;
        ct.u = ModuleVector::from_bytes(p.ring, p.k, b.subspan(0, per * p.k));
        ct.v = RingElement::from_bytes(p.ring, b.subspan(per * p.k));
        return ct;
    }

    bool operator==(const KemCiphertext& o) const { return u == o.u && v == o.v; }
};

struct SessionKey {
    std::array<uint8_t, 32> key{};
    bool operator==(const SessionKey& o) const { return key == o.key; }
};

/// Expand the public matrix A (row-major, k x k) from its seed. Deterministic:
/// one uniform stream, elements in order A[0][0], A[0][1], ...
inline std::vector<ModuleVector> kem_expand_a(const KemParams& p, const Seed256& a_seed) {
    Rng rng = Rng(a_seed).derive("zkfl/kem/matA/v1");
    std::vector<ModuleVector> rows;
    rows.reserve(p.k);
    for (uint32_t i = 0; i < p.k; ++i) {
        std::vector<RingElement> row;
        row.reserve(p.k);
        for (uint32_t j = 0; j < p.k; ++j) row.push_back(sample_uniform(p.ring, rng));
        rows.emplace_back(std::move(row));
    }
    return rows;
}

/// Draw order: A-seed, then s (k CBD elements), then e (k CBD elements).
inline KemKeyPair kem_keygen(const KemParams& p, Rng& rng) {
    p.validate();
    KemKeyPair kp;
    kp.ek.a_seed = rng.seed256();
    auto a = kem_expand_a(p, kp.ek.a_seed);

    std::vector<RingElement> s, e;
    for (uint32_t i = 0; i < p.k; ++i) s.push_back(sample_cbd(p.ring, p.eta1, rng));
    for (uint32_t i = 0; i < p.k; ++i) e.push_back(sample_cbd(p.ring, p.eta1, rng));
    kp.dk.s = ModuleVector(std::move(s));

    std::vector<RingElement> t;
    for (uint32_t i = 0; i < p.k; ++i) t.push_back(ring_add(module_dot(a[i], kp.dk.s), e[i]));
    kp.ek.t = ModuleVector(std::move(t));
    return kp;
}

/// Encode a 256-bit message as round(q/2) * m(X).
inline RingElement kem_encode_message(const KemParams& p, const std::array<uint8_t, 32>& m) {
    const uint64_t half = (p.ring.q + 1) / 2;
    std::vector<uint64_t> c(p.ring.n, 0);
    for (uint32_t i = 0; i < p.ring.n && i < 256; ++i)
        if ((m[i / 8] >> (i % 8)) & 1) c[i] = half;
    return RingElement(p.ring, std::move(c));
}

inline SessionKey kem_kdf(const KemParams& p, const std::array<uint8_t, 32>& m) {
    RingElement mp = kem_encode_message(p, m);
    // the shared element is hashed via its canonical serialization
    Bytes ser = mp.to_bytes();
    Digest d = tagged_hash("zkfl/kem/kdf/v1", {std::span<const uint8_t>(ser)});
    SessionKey k;
    std::copy(d.begin(), d.end(), k.key.begin());
    return k;
}

/// u = A^T r + e1, v = <t, r> + e2 + round(q/2)*m; K = KDF(m).
inline std::pair<KemCiphertext, SessionKey> kem_encaps(const KemParams& p, const KemPublicKey& ek, Rng& rng) {
    p.validate();
    auto a = kem_expand_a(p, ek.a_seed);

    std::array<uint8_t, 32> m{};
    rng.fill(m.data(), m.size());

    std::vector<RingElement> r, e1;
    for (uint32_t i = 0; i < p.k; ++i) r.push_back(sample_cbd(p.ring, p.eta1, rng));
    for (uint32_t i = 0; i < p.k; ++i) e1.push_back(sample_cbd(p.ring, p.eta2, rng));
    RingElement e2 = sample_cbd(p.ring, p.eta2, rng);
    ModuleVector rv((std::vector<RingElement>(r)));

    std::vector<RingElement> u;
    for (uint32_t i = 0; i < p.k; ++i) {
        // column i of A = (A[0][i], ..., A[k-1][i])
        RingElement acc = RingElement::zero(p.ring);
        for (uint32_t j = 0; j < p.k; ++j) acc = ring_add(acc, ring_mul(a[j].elems[i], r[j]));
        u.push_back(ring_add(acc, e1[i]));
    }

    RingElement v = ring_add(ring_add(module_dot(ek.t, rv), e2), kem_encode_message(p, m));

    KemCiphertext ct{ModuleVector(std::move(u)), std::move(v)};
    return {std::move(ct), kem_kdf(p, m)};
}

/// Round v - <s, u> against q/2 per coefficient; always returns a key.
inline SessionKey kem_decaps(const KemParams& p, const KemSecretKey& dk, const KemCiphertext& ct) {
    RingElement d = ring_sub(ct.v, module_dot(dk.s, ct.u));
    std::array<uint8_t, 32> m{};
    const uint64_t q = p.ring.q;
    for (uint32_t i = 0; i < p.ring.n && i < 256; ++i) {
        uint64_t c = d.coeff(i);
        // closer to q/2 than to 0 (mod q)?
        bool one = c > q / 4 && c <= 3 * q / 4;
        if (one) m[i / 8] |= uint8_t(1) << (i % 8);
    }
    return kem_kdf(p, m);
}

}  // namespace zkfl

#endif  // ZKFL_KEM_HPP
