/**
 * @file rng.hpp
 * @brief Deterministic seedable random stream: AES-256-CTR keyed by a 256-bit
 *        seed (zero IV), with SHA3-based child-seed derivation.
 *
 * The construction is fixed for the whole project: every random value in the
 * simulator descends from one master seed through labeled derivations, so a
 * run is reproducible byte-for-byte. AES-CTR output is platform-independent.
 *
 * Instances are single-owner: movable, not copyable, never shared across
 * threads.
 * @license Apache-2.0
 */

#ifndef ZKFL_RNG_HPP
#define ZKFL_RNG_HPP

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstring>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "zkfl/bytes.hpp"
#include "zkfl/hash.hpp"

namespace zkfl {

using Seed256 = std::array<uint8_t, 32>;

class Rng {
public:
    explicit Rng(const Seed256& seed) : seed_(seed), ctx_(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free) {
        if (!ctx_) throw std::runtime_error("rng: ctx alloc failed");
        std::array<uint8_t, 16> iv{};
        if (EVP_EncryptInit_ex(ctx_.get(), EVP_aes_256_ctr(), nullptr, seed_.data(), iv.data()) != 1)
            throw std::runtime_error("rng: init failed");
    }

    /// Convenience: expand a small integer seed into a full 256-bit seed.
    static Rng from_u64(uint64_t s) { return Rng(seed_from_u64(s)); }

    static Seed256 seed_from_u64(uint64_t s) {
        ByteWriter w;
        w.put_u64(s);
        Digest d = tagged_hash("zkfl/seed64/v1", {std::span<const uint8_t>(w.data())});
        Seed256 out;
        std::memcpy(out.data(), d.data(), 32);
        return out;
    }

    Rng(Rng&&) = default;
    Rng& operator=(Rng&&) = default;
    Rng(const Rng&) = delete;
    Rng& operator=(const Rng&) = delete;

    const Seed256& seed() const { return seed_; }

    /// Child seed for an independent labeled stream. Children never overlap
    /// with the parent stream or with siblings carrying other labels/indices.
    Seed256 derive_seed(std::string_view label, uint64_t i0 = 0, uint64_t i1 = 0) const {
        ByteWriter w;
        w.put_bytes(seed_);
        w.put_str(label);
        w.put_u64(i0);
        w.put_u64(i1);
        Digest d = tagged_hash("zkfl/derive/v1", {std::span<const uint8_t>(w.data())});
        Seed256 out;
        std::memcpy(out.data(), d.data(), 32);
        return out;
    }

    Rng derive(std::string_view label, uint64_t i0 = 0, uint64_t i1 = 0) const {
        return Rng(derive_seed(label, i0, i1));
    }

    void fill(uint8_t* out, size_t len) {
        while (len > 0) {
            if (pos_ == buf_.size()) refill();
            size_t take = std::min(len, buf_.size() - pos_);
            std::memcpy(out, buf_.data() + pos_, take);
            pos_ += take;
            out += take;
            len -= take;
        }
    }

    Bytes bytes(size_t len) {
        Bytes b(len);
        fill(b.data(), len);
        return b;
    }

    Seed256 seed256() {
        Seed256 s;
        fill(s.data(), s.size());
        return s;
    }

    uint8_t u8() {
        uint8_t v;
        fill(&v, 1);
        return v;
    }

    uint16_t u16() {
        uint8_t b[2];
        fill(b, 2);
        return static_cast<uint16_t>(b[0] | (uint16_t(b[1]) << 8));
    }

    uint64_t u64() {
        uint8_t b[8];
        fill(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }

    /// Unbiased uniform draw in [0, bound) by rejection.
    uint64_t below(uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("rng: bound must be positive");
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        for (;;) {
            uint64_t v = u64();
            if (v < limit) return v % bound;
        }
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (pairs cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = real01();
        } while (u1 <= 0.0);
        u2 = real01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    void refill() {
        static constexpr size_t kBlock = 4096;
        static const std::array<uint8_t, kBlock> zeros{};
        buf_.resize(kBlock);
        int outl = 0;
        if (EVP_EncryptUpdate(ctx_.get(), buf_.data(), &outl, zeros.data(), kBlock) != 1 ||
            outl != static_cast<int>(kBlock))
            throw std::runtime_error("rng: stream update failed");
        pos_ = 0;
    }

    Seed256 seed_;
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx_;
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace zkfl

#endif  // ZKFL_RNG_HPP
