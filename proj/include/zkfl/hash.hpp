/**
 * @file hash.hpp
 * @brief SHA3-256 (via OpenSSL EVP) with domain-separation tags.
 *
 * SHA3-256 is the single hash of the project: it drives the Fiat-Shamir
 * challenge, the KEM key derivation, and seed derivation for the
 * deterministic RNG tree.
 * @license Apache-2.0
 */

#ifndef ZKFL_HASH_HPP
#define ZKFL_HASH_HPP

#include <openssl/evp.h>

#include <array>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string_view>

#include "zkfl/bytes.hpp"

namespace zkfl {

using Digest = std::array<uint8_t, 32>;

/// Incremental SHA3-256.
class Sha3_256 {
public:
    Sha3_256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha3_256(), nullptr) != 1)
            throw std::runtime_error("sha3: init failed");
    }
    ~Sha3_256() { EVP_MD_CTX_free(ctx_); }
    Sha3_256(const Sha3_256&) = delete;
    Sha3_256& operator=(const Sha3_256&) = delete;

    Sha3_256& update(std::span<const uint8_t> b) {
        if (EVP_DigestUpdate(ctx_, b.data(), b.size()) != 1)
            throw std::runtime_error("sha3: update failed");
        return *this;
    }

    Sha3_256& update(std::string_view s) {
        return update(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
    }

    Digest finalize() {
        Digest d{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, d.data(), &len) != 1 || len != d.size())
            throw std::runtime_error("sha3: final failed");
        return d;
    }

private:
    EVP_MD_CTX* ctx_;
};

inline Digest sha3_256(std::span<const uint8_t> b) {
    Sha3_256 h;
    h.update(b);
    return h.finalize();
}

/// SHA3-256 over a length-prefixed tag followed by the raw parts.
/// The tag prefix gives every use of the hash its own domain.
inline Digest tagged_hash(std::string_view tag, std::initializer_list<std::span<const uint8_t>> parts) {
    Sha3_256 h;
    ByteWriter w;
    w.put_str(tag);
    h.update(w.data());
    for (auto p : parts) h.update(p);
    return h.finalize();
}

}  // namespace zkfl

#endif  // ZKFL_HASH_HPP
