// BFV correctness against plaintext oracles, the noise-budget predicate, and
// the fixed-point gradient encoding.

#include <gtest/gtest.h>

#include <cmath>

#include "zkfl/he.hpp"

using namespace zkfl;

namespace {
const BfvParams kP = BfvParams::standard();

QuantizedBlock random_block(Rng& rng, size_t len = kP.ring.n) {
    QuantizedBlock b;
    b.scale = 1.0;
    for (size_t i = 0; i < len; ++i) b.values.push_back(rng.below(kP.t));
    return b;
}
}  // namespace

TEST(BfvParams, Defaults) {
    EXPECT_EQ(kP.ring.n, 512u);
    EXPECT_EQ(kP.ring.q, (uint64_t(1) << 32) - 5);
    EXPECT_EQ(kP.t, uint64_t(1) << 16);
    EXPECT_EQ(kP.delta(), 65535u);
    EXPECT_DOUBLE_EQ(kP.sigma, 3.2);
}

TEST(BfvKeygen, DefiningEquation) {
    // p0 + p1*s = -e with small e
    Rng rng = Rng::from_u64(200);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    RingElement neg_e = ring_add(kp.pk.p0, ring_mul(kp.pk.p1, kp.sk.s));
    EXPECT_LE(neg_e.inf_norm_centered(), int64_t(std::ceil(10.0 * kP.sigma)));
}

TEST(BfvKeygen, DeterministicFixture) {
    Rng a = Rng::from_u64(201), b = Rng::from_u64(201);
    BfvKeyPair k1 = bfv_keygen(kP, a), k2 = bfv_keygen(kP, b);
    EXPECT_EQ(k1.pk.p0, k2.pk.p0);
    EXPECT_EQ(k1.pk.p1, k2.pk.p1);
    EXPECT_EQ(k1.sk.s, k2.sk.s);
}

TEST(BfvKeygen, ErrorWithinSamplerCutoff) {
    Rng rng = Rng::from_u64(202);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    RingElement neg_e = ring_add(kp.pk.p0, ring_mul(kp.pk.p1, kp.sk.s));
    EXPECT_LE(neg_e.inf_norm_centered(), 32);  // 10 * sigma = 32
}

TEST(BfvEncrypt, ZeroRoundTrip) {
    Rng rng = Rng::from_u64(203);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    QuantizedBlock zero;
    zero.values.assign(kP.ring.n, 0);
    QuantizedBlock dec = bfv_decrypt(kP, kp.sk, bfv_encrypt(kP, kp.pk, zero, rng));
    EXPECT_EQ(dec.values, zero.values);
}

TEST(BfvEncrypt, RandomRoundTrips) {
    Rng rng = Rng::from_u64(204);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    for (int t = 0; t < 100; ++t) {
        QuantizedBlock m = random_block(rng);
        QuantizedBlock dec = bfv_decrypt(kP, kp.sk, bfv_encrypt(kP, kp.pk, m, rng));
        EXPECT_EQ(dec.values, m.values);
    }
}

TEST(BfvEncrypt, FreshRandomnessDistinctCiphertexts) {
    Rng rng = Rng::from_u64(205);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    QuantizedBlock m = random_block(rng);
    HeCiphertext a = bfv_encrypt(kP, kp.pk, m, rng);
    HeCiphertext b = bfv_encrypt(kP, kp.pk, m, rng);
    EXPECT_NE(a.to_bytes(), b.to_bytes());
}

TEST(BfvEncrypt, OutOfRangePlaintextThrows) {
    Rng rng = Rng::from_u64(206);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    QuantizedBlock bad;
    bad.values = {kP.t};  // == t, out of range
    EXPECT_THROW(bfv_encrypt(kP, kp.pk, bad, rng), std::invalid_argument);
}

TEST(BfvAdd, PlaintextSumOracle) {
    Rng rng = Rng::from_u64(207);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    for (int t = 0; t < 100; ++t) {
        QuantizedBlock m1 = random_block(rng), m2 = random_block(rng);
        HeCiphertext sum = bfv_add(kP, bfv_encrypt(kP, kp.pk, m1, rng), bfv_encrypt(kP, kp.pk, m2, rng));
        QuantizedBlock dec = bfv_decrypt(kP, kp.sk, sum);
        for (uint32_t i = 0; i < kP.ring.n; ++i)
            EXPECT_EQ(dec.values[i], (m1.values[i] + m2.values[i]) % kP.t);
    }
}

TEST(BfvAdd, AdditiveIdentity) {
    Rng rng = Rng::from_u64(208);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    QuantizedBlock m = random_block(rng);
    QuantizedBlock zero;
    zero.values.assign(kP.ring.n, 0);
    HeCiphertext sum = bfv_add(kP, bfv_encrypt(kP, kp.pk, m, rng), bfv_encrypt(kP, kp.pk, zero, rng));
    EXPECT_EQ(bfv_decrypt(kP, kp.sk, sum).values, m.values);
}

TEST(BfvAdd, FiveWaySumDecryptsExactly) {
    Rng rng = Rng::from_u64(209);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    const int n_sum = 5;
    std::vector<uint64_t> expect(kP.ring.n, 0);
    HeCiphertext acc{RingElement::zero(kP.ring), RingElement::zero(kP.ring), 1};
    bool first = true;
    for (int i = 0; i < n_sum; ++i) {
        QuantizedBlock m = random_block(rng);
        for (uint32_t j = 0; j < kP.ring.n; ++j) expect[j] = (expect[j] + m.values[j]) % kP.t;
        HeCiphertext ct = bfv_encrypt(kP, kp.pk, m, rng);
        acc = first ? ct : bfv_add(kP, acc, ct);
        first = false;
    }
    EXPECT_EQ(acc.adds, 5u);
    EXPECT_EQ(bfv_decrypt(kP, kp.sk, acc).values, expect);
}

TEST(BfvAdd, TracksAdditionCount) {
    Rng rng = Rng::from_u64(210);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    HeCiphertext a = bfv_encrypt(kP, kp.pk, random_block(rng), rng);
    HeCiphertext b = bfv_encrypt(kP, kp.pk, random_block(rng), rng);
    EXPECT_EQ(a.adds, 1u);
    EXPECT_EQ(bfv_add(kP, a, b).adds, 2u);
}

TEST(BfvAdd, BudgetViolationThrows) {
    Rng rng = Rng::from_u64(211);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    // max admissible adds at the default parameters is 8
    EXPECT_EQ(max_budget_adds(kP), 8u);
    HeCiphertext acc = bfv_encrypt(kP, kp.pk, random_block(rng), rng);
    for (int i = 0; i < 7; ++i) acc = bfv_add(kP, acc, bfv_encrypt(kP, kp.pk, random_block(rng), rng));
    EXPECT_EQ(acc.adds, 8u);
    EXPECT_THROW(bfv_add(kP, acc, bfv_encrypt(kP, kp.pk, random_block(rng), rng)), std::runtime_error);
}

TEST(NoiseBudget, PaperValues) {
    // 5 * 7.4 * 512 = 18,944 below q/(2t) ~ 32,768
    EXPECT_TRUE(check_noise_budget(5, kP));
    // direct evaluation: N=8 -> 30,310.4 is inside, N=9 -> 34,099.2 is not
    EXPECT_TRUE(check_noise_budget(8, kP));
    EXPECT_FALSE(check_noise_budget(9, kP));
    EXPECT_THROW(check_noise_budget(0, kP), std::invalid_argument);
}

TEST(NoiseBudget, Monotonicity) {
    // decreasing in N, sigma, n; increasing in q
    BfvParams p = kP;
    EXPECT_TRUE(check_noise_budget(5, p));
    for (uint64_t n = 1; n + 1 <= 32; ++n)
        if (!check_noise_budget(n, p)) EXPECT_FALSE(check_noise_budget(n + 1, p));
    BfvParams hi_sigma = p;
    hi_sigma.sigma = 30.0;
    EXPECT_FALSE(check_noise_budget(9, hi_sigma));
    BfvParams small_n = p;
    small_n.ring = RingParams(256, p.ring.q);
    EXPECT_TRUE(check_noise_budget(9, small_n));  // halving n doubles headroom
}

TEST(Quantize, ZeroVector) {
    std::vector<double> x(1000, 0.0);
    auto blocks = quantize_gradient(x, 256.0, kP.t, kP.ring.n);
    ASSERT_EQ(blocks.size(), 2u);
    for (const auto& b : blocks)
        for (uint64_t v : b.values) EXPECT_EQ(v, 0u);
}

TEST(Quantize, RoundTripErrorBound) {
    Rng rng = Rng::from_u64(212);
    const double scale = 256.0;
    std::vector<double> x(512);
    for (auto& v : x) v = (rng.real01() - 0.5) * 10.0;
    auto blocks = quantize_gradient(x, scale, kP.t, kP.ring.n);
    auto back = dequantize_sum(blocks, scale, 1, kP.t);
    for (size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::fabs(back[i] - x[i]), 0.5 / scale + 1e-12);
}

TEST(Quantize, OverflowThrows) {
    std::vector<double> x = {200.0};  // 200 * 256 > t/2
    EXPECT_THROW(quantize_gradient(x, 256.0, kP.t, kP.ring.n), std::overflow_error);
}

TEST(Quantize, ChunksIntoBlocks) {
    std::vector<double> x(kP.ring.n + 3, 0.5);
    auto blocks = quantize_gradient(x, 256.0, kP.t, kP.ring.n);
    ASSERT_EQ(blocks.size(), 2u);
    EXPECT_EQ(blocks[0].values.size(), kP.ring.n);
    EXPECT_EQ(blocks[1].values.size(), 3u);
}

TEST(DequantizeSum, AveragingIdentity) {
    // sum of N identical vectors averages back to the vector
    Rng rng = Rng::from_u64(213);
    const double scale = 256.0;
    const uint64_t n_sum = 5;
    std::vector<double> x(64);
    for (auto& v : x) v = (rng.real01() - 0.5) * 4.0;
    auto one = quantize_gradient(x, scale, kP.t, kP.ring.n);
    QuantizedBlock summed;
    summed.scale = scale;
    for (size_t i = 0; i < one[0].values.size(); ++i)
        summed.values.push_back((one[0].values[i] * n_sum) % kP.t);
    auto avg = dequantize_sum(std::vector<QuantizedBlock>{summed}, scale, n_sum, kP.t);
    for (size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::fabs(avg[i] - x[i]), 0.5 / scale + 1e-12);
}

TEST(DequantizeSum, RandomVectorsMeanOracle) {
    Rng rng = Rng::from_u64(214);
    const double scale = 256.0;
    const int n_clients = 5;
    const size_t dim = 128;
    std::vector<std::vector<double>> xs(n_clients, std::vector<double>(dim));
    for (auto& x : xs)
        for (auto& v : x) v = (rng.real01() - 0.5) * 6.0;
    QuantizedBlock summed;
    summed.scale = scale;
    summed.values.assign(dim, 0);
    for (const auto& x : xs) {
        auto b = quantize_gradient(x, scale, kP.t, kP.ring.n);
        for (size_t i = 0; i < dim; ++i) summed.values[i] = (summed.values[i] + b[0].values[i]) % kP.t;
    }
    auto avg = dequantize_sum(std::vector<QuantizedBlock>{summed}, scale, n_clients, kP.t);
    for (size_t i = 0; i < dim; ++i) {
        double mean = 0;
        for (const auto& x : xs) mean += x[i];
        mean /= n_clients;
        EXPECT_LE(std::fabs(avg[i] - mean), 2.0 / scale);
    }
}

TEST(DequantizeSum, EmptyContributorSetRejected) {
    std::vector<QuantizedBlock> blocks;
    EXPECT_THROW(dequantize_sum(blocks, 256.0, 0, kP.t), std::invalid_argument);
}

TEST(HeCiphertext, SerializationAndSize) {
    Rng rng = Rng::from_u64(215);
    BfvKeyPair kp = bfv_keygen(kP, rng);
    HeCiphertext ct = bfv_encrypt(kP, kp.pk, random_block(rng), rng);
    Bytes b = ct.to_bytes();
    EXPECT_EQ(b.size(), 2u * 512u * 4u);  // c0 || c1, 4 bytes per coefficient
    HeCiphertext back = HeCiphertext::from_bytes(kP, b);
    EXPECT_EQ(back.c0, ct.c0);
    EXPECT_EQ(back.c1, ct.c1);
}
