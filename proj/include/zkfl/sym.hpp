/**
 * @file sym.hpp
 * @brief Authenticated encryption of the client payload under the KEM session
 *        key: AES-256-GCM, 96-bit random nonce, 128-bit tag.
 * @license Apache-2.0
 */

#ifndef ZKFL_SYM_HPP
#define ZKFL_SYM_HPP

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

#include "zkfl/bytes.hpp"
#include "zkfl/kem.hpp"
#include "zkfl/rng.hpp"

namespace zkfl {

struct AeadError : std::runtime_error {
    AeadError() : std::runtime_error("aead: authentication failure") {}
};

/// Framing: nonce || body || tag.
struct SealedPayload {
    std::array<uint8_t, 12> nonce{};
    Bytes body;
    std::array<uint8_t, 16> tag{};

    Bytes to_bytes() const {
        ByteWriter w;
        w.put_bytes(nonce);
        w.put_u64(body.size());
        w.put_bytes(body);
        w.put_bytes(tag);
        return w.take();
    }

    static SealedPayload from_bytes(std::span<const uint8_t> b) {
        ByteReader r(b);
        SealedPayload s;
        Bytes n = r.get_bytes(12);
        std::copy(n.begin(), n.end(), s.nonce.begin());
        uint64_t len = r.get_u64();
        if (len > r.remaining()) throw std::runtime_error("sealed payload: truncated body");
        s.body = r.get_bytes(len);
        Bytes t = r.get_bytes(16);
        std::copy(t.begin(), t.end(), s.tag.begin());
        return s;
    }

    size_t wire_size() const { return 12 + 8 + body.size() + 16; }
};

namespace detail {
struct CipherCtx {
    EVP_CIPHER_CTX* c;
    CipherCtx() : c(EVP_CIPHER_CTX_new()) {
        if (!c) throw std::runtime_error("aead: ctx alloc failed");
    }
    ~CipherCtx() { EVP_CIPHER_CTX_free(c); }
};
}  // namespace detail

inline SealedPayload seal(const SessionKey& key, std::span<const uint8_t> plaintext, Rng& rng) {
    SealedPayload out;
    rng.fill(out.nonce.data(), out.nonce.size());

    detail::CipherCtx ctx;
    if (EVP_EncryptInit_ex(ctx.c, EVP_aes_256_gcm(), nullptr, key.key.data(), out.nonce.data()) != 1)
        throw std::runtime_error("aead: encrypt init failed");
    out.body.resize(plaintext.size());
    int outl = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.c, out.body.data(), &outl, plaintext.data(), static_cast<int>(plaintext.size())) != 1)
        throw std::runtime_error("aead: encrypt failed");
    int fin = 0;
    uint8_t dummy[16];
    if (EVP_EncryptFinal_ex(ctx.c, dummy, &fin) != 1) throw std::runtime_error("aead: encrypt final failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.c, EVP_CTRL_GCM_GET_TAG, 16, out.tag.data()) != 1)
        throw std::runtime_error("aead: tag fetch failed");
    return out;
}

/// Returns the plaintext iff key and integrity check match; throws AeadError
/// otherwise (this is how a KEM key mismatch or tampering surfaces).
inline Bytes open(const SessionKey& key, const SealedPayload& sealed) {
    detail::CipherCtx ctx;
    if (EVP_DecryptInit_ex(ctx.c, EVP_aes_256_gcm(), nullptr, key.key.data(), sealed.nonce.data()) != 1)
        throw std::runtime_error("aead: decrypt init failed");
    Bytes out(sealed.body.size());
    int outl = 0;
    if (!sealed.body.empty() &&
        EVP_DecryptUpdate(ctx.c, out.data(), &outl, sealed.body.data(), static_cast<int>(sealed.body.size())) != 1)
        throw AeadError();
    std::array<uint8_t, 16> tag = sealed.tag;
    if (EVP_CIPHER_CTX_ctrl(ctx.c, EVP_CTRL_GCM_SET_TAG, 16, tag.data()) != 1)
        throw std::runtime_error("aead: tag set failed");
    int fin = 0;
    uint8_t dummy[16];
    if (EVP_DecryptFinal_ex(ctx.c, dummy, &fin) != 1) throw AeadError();
    return out;
}

}  // namespace zkfl

#endif  // ZKFL_SYM_HPP
