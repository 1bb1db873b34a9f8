// Commitment linearity against a hand oracle, Fiat-Shamir behavior,
// prover completeness/rejection statistics, and the three verifier checks.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "zkfl/zkp.hpp"

using namespace zkfl;

namespace {

ZkpParams small_params(uint32_t d = 64) {
    ZkpParams p;
    p.d = d;
    return p;
}

// gradient with a prescribed real-unit l2 norm
std::vector<double> gradient_with_norm(uint32_t d, double norm, Rng& rng) {
    std::vector<double> g(d);
    double ss = 0;
    for (auto& v : g) {
        v = rng.gaussian();
        ss += v * v;
    }
    double f = norm / std::sqrt(ss);
    for (auto& v : g) v *= f;
    return g;
}

// asymptotic two-sample Kolmogorov-Smirnov p-value
double ks_p_value(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d_stat = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        double fa = double(i) / a.size(), fb = double(j) / b.size();
        d_stat = std::max(d_stat, std::fabs(fa - fb));
    }
    double ne = double(a.size()) * b.size() / (a.size() + b.size());
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d_stat;
    double p = 0;
    for (int k = 1; k <= 100; ++k) p += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST(Commit, ZeroAtOrigin) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(400).seed256(), p);
    std::vector<int64_t> x(p.d, 0), r(p.ell, 0);
    for (uint64_t v : key.commit(x, r)) EXPECT_EQ(v, 0u);
}

TEST(Commit, Linearity) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(401).seed256(), p);
    Rng rng = Rng::from_u64(402);
    std::vector<int64_t> x1(p.d), x2(p.d), r1(p.ell), r2(p.ell);
    for (auto& v : x1) v = int64_t(rng.below(2000)) - 1000;
    for (auto& v : x2) v = int64_t(rng.below(2000)) - 1000;
    for (auto& v : r1) v = int64_t(rng.below(2000)) - 1000;
    for (auto& v : r2) v = int64_t(rng.below(2000)) - 1000;
    auto c1 = key.commit(x1, r1), c2 = key.commit(x2, r2);
    std::vector<int64_t> xs(p.d), rs(p.ell);
    for (uint32_t i = 0; i < p.d; ++i) xs[i] = x1[i] + x2[i];
    for (uint32_t i = 0; i < p.ell; ++i) rs[i] = r1[i] + r2[i];
    auto cs = key.commit(xs, rs);
    for (uint32_t i = 0; i < p.m; ++i) EXPECT_EQ(cs[i], (c1[i] + c2[i]) % p.q);
}

TEST(Commit, TinyMatrixOracle) {
    // d=3, ell=2, m=2: compare against a hand-rolled matrix product over the
    // same expanded matrix
    ZkpParams p;
    p.d = 3;
    p.ell = 2;
    p.m = 2;
    p.q = 251;
    CommitmentKey key(Rng::from_u64(403).seed256(), p);
    const auto& a = key.matrix();
    ASSERT_EQ(a.size(), size_t(p.m) * (p.d + p.ell));
    std::vector<int64_t> x = {7, -3, 100}, r = {-50, 2};
    auto got = key.commit(x, r);
    for (uint32_t row = 0; row < p.m; ++row) {
        long long acc = 0;
        std::vector<int64_t> v = {7, -3, 100, -50, 2};
        for (uint32_t col = 0; col < p.d + p.ell; ++col) {
            long long coeff = a[row * (p.d + p.ell) + col];
            long long val = ((v[col] % (long long)p.q) + (long long)p.q) % (long long)p.q;
            acc = (acc + coeff * val) % (long long)p.q;
        }
        EXPECT_EQ(got[row], (uint64_t)acc);
    }
}

TEST(Commit, MatrixEntriesInRange) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(404).seed256(), p);
    for (uint16_t v : key.matrix()) EXPECT_LT(v, p.q);
}

TEST(Commit, SameSeedSameMatrix) {
    ZkpParams p = small_params();
    Seed256 s = Rng::from_u64(405).seed256();
    CommitmentKey k1(s, p), k2(s, p);
    EXPECT_EQ(k1.matrix(), k2.matrix());
}

TEST(FiatShamir, Deterministic) {
    ZkpParams p = small_params();
    std::vector<uint64_t> C(p.m, 5), T(p.m, 9);
    EXPECT_EQ(fiat_shamir_challenge(C, T, 5.0, p), fiat_shamir_challenge(C, T, 5.0, p));
}

TEST(FiatShamir, ChallengeRange) {
    ZkpParams p = small_params();
    Rng rng = Rng::from_u64(406);
    for (int t = 0; t < 200; ++t) {
        std::vector<uint64_t> C(p.m), T(p.m);
        for (auto& v : C) v = rng.below(p.q);
        for (auto& v : T) v = rng.below(p.q);
        uint32_t c = fiat_shamir_challenge(C, T, 5.0, p);
        EXPECT_GE(c, p.challenge_offset);
        EXPECT_LT(c, p.challenge_offset + p.challenge_count());
    }
}

TEST(FiatShamir, AvalancheOnCommitmentPerturbation) {
    ZkpParams p = small_params();
    Rng rng = Rng::from_u64(407);
    std::vector<uint64_t> C(p.m), T(p.m);
    for (auto& v : C) v = rng.below(p.q);
    for (auto& v : T) v = rng.below(p.q);
    uint32_t base = fiat_shamir_challenge(C, T, 5.0, p);
    int changed = 0;
    const int flips = 1000;
    for (int t = 0; t < flips; ++t) {
        auto C2 = C;
        C2[t % p.m] = (C2[t % p.m] + 1 + t / p.m) % p.q;
        if (fiat_shamir_challenge(C2, T, 5.0, p) != base) ++changed;
    }
    // challenge space has 2^kappa values: change probability ~ 1 - 2^-kappa
    double expect = 1.0 - 1.0 / double(p.challenge_count());
    EXPECT_NEAR(double(changed) / flips, expect, 0.05);
}

TEST(FiatShamir, CanonicalTauEncoding) {
    ZkpParams p = small_params();
    std::vector<uint64_t> C(p.m, 1), T(p.m, 2);
    EXPECT_EQ(fiat_shamir_challenge(C, T, std::stod("5.0"), p),
              fiat_shamir_challenge(C, T, std::stod("5.00"), p));
}

TEST(RejectionSampling, ZeroCenterAlwaysAccepts) {
    ZkpParams p = small_params();
    Rng rng = Rng::from_u64(408);
    std::vector<int64_t> z = sample_gaussian_vec(p.d, p.sigma_y(), rng);
    std::vector<int64_t> w(p.d, 0);
    for (int t = 0; t < 50; ++t)
        EXPECT_TRUE(rejection_sample_accept(z, 0, w, p.sigma_y(), p.rejection_m(), rng));
}

TEST(RejectionSampling, AcceptanceRateNearOneOverM) {
    ZkpParams p = small_params(256);
    Rng rng = Rng::from_u64(409);
    std::vector<double> g = gradient_with_norm(p.d, 0.9 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    const uint32_t c = p.challenge_offset + p.challenge_count() - 1;  // worst case in the space
    int accepted = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        auto y = sample_gaussian_vec(p.d, p.sigma_y(), rng);
        std::vector<int64_t> z(p.d);
        for (uint32_t i = 0; i < p.d; ++i) z[i] = y[i] + int64_t(c) * qg.w[i];
        if (rejection_sample_accept(z, c, qg.w, p.sigma_y(), p.rejection_m(), rng)) ++accepted;
    }
    double rate = double(accepted) / trials;
    EXPECT_GE(rate, 1.0 / p.rejection_m() - 0.1);
}

TEST(RejectionSampling, OutputDistributionMatchesSimulator) {
    // accepted responses should look like D_{sigma_y} regardless of the
    // (small) gradient: per-coordinate two-sample KS against direct draws
    ZkpParams p = small_params(4);
    Rng rng = Rng::from_u64(410);
    std::vector<double> g = gradient_with_norm(p.d, 0.5 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    CommitmentKey key(Rng::from_u64(411).seed256(), p);

    const int n_proofs = 10000;
    std::vector<std::vector<double>> real(p.d);
    for (int t = 0; t < n_proofs; ++t) {
        NormProof pr = prove_norm(key, qg, p, rng);
        for (uint32_t i = 0; i < p.d; ++i) real[i].push_back(double(pr.z[i]));
    }
    Rng sim_rng = Rng::from_u64(412);
    for (uint32_t i = 0; i < p.d; ++i) {
        auto sim = sample_gaussian_vec(n_proofs, p.sigma_y(), sim_rng);
        std::vector<double> simd(sim.begin(), sim.end());
        EXPECT_GT(ks_p_value(real[i], simd), 0.001) << "coordinate " << i;
    }
}

TEST(ProveVerify, ZeroGradientVerifies) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(413).seed256(), p);
    Rng rng = Rng::from_u64(414);
    QuantizedGradient qg;
    qg.w.assign(p.d, 0);
    qg.scale = p.scale;
    NormProof pr = prove_norm(key, qg, p, rng);
    EXPECT_TRUE(verify_norm(key, pr, p.tau, p));
}

TEST(ProveVerify, CompletenessAtPointNineTau) {
    ZkpParams p = small_params(1000);
    CommitmentKey key(Rng::from_u64(415).seed256(), p);
    Rng rng = Rng::from_u64(416);
    uint64_t total_restarts = 0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        auto g = gradient_with_norm(p.d, 0.9 * p.tau, rng);
        QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
        ProveStats stats;
        NormProof pr = prove_norm(key, qg, p, rng, &stats);
        total_restarts += stats.restarts;
        EXPECT_TRUE(verify_norm(key, pr, p.tau, p));
    }
    EXPECT_LT(double(total_restarts) / trials, 3.0);
}

TEST(ProveVerify, StatementAboveBoundRefused) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(417).seed256(), p);
    Rng rng = Rng::from_u64(418);
    auto g = gradient_with_norm(p.d, 10.0 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    EXPECT_THROW(prove_norm(key, qg, p, rng), NormBoundError);
}

TEST(ProveVerify, RestartLimitSignalsMisparameterization) {
    // an absurd challenge magnitude makes every rejection-sampling attempt
    // fail; the prover must surface that instead of looping forever
    ZkpParams p = small_params();
    p.challenge_offset = 5000;
    p.max_restarts = 8;
    CommitmentKey key(Rng::from_u64(419).seed256(), p);
    Rng rng = Rng::from_u64(420);
    auto g = gradient_with_norm(p.d, 0.9 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    EXPECT_THROW(prove_norm(key, qg, p, rng), RestartLimitError);
}

TEST(ProveVerify, ByzantineScaleFiftyRejectedByNormCheck) {
    // dishonest transcript over a huge gradient: the response norm lands far
    // outside B for every challenge in the space
    ZkpParams p = small_params(1000);
    CommitmentKey key(Rng::from_u64(421).seed256(), p);
    Rng rng = Rng::from_u64(422);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> g(p.d);
        for (auto& v : g) v = rng.gaussian() * 50.0;  // norm ~ 50*sqrt(d) >> tau
        QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
        NormProof pr = prove_transcript_unchecked(key, qg, p, rng);
        VerifyResult vr = verify_norm_detail(key, pr, p.tau, p);
        EXPECT_FALSE(vr.ok);
        EXPECT_EQ(vr.failed, VerifyCheck::norm_bound);
    }
}

TEST(ProveVerify, TamperedResponseFailsAlgebraicCheck) {
    ZkpParams p = small_params(256);
    CommitmentKey key(Rng::from_u64(423).seed256(), p);
    Rng rng = Rng::from_u64(424);
    for (int t = 0; t < 50; ++t) {
        auto g = gradient_with_norm(p.d, 0.5 * p.tau, rng);
        QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
        NormProof pr = prove_norm(key, qg, p, rng);
        pr.z[rng.below(p.d)] += 1 + int64_t(rng.below(7));
        VerifyResult vr = verify_norm_detail(key, pr, p.tau, p);
        EXPECT_FALSE(vr.ok);
        EXPECT_EQ(vr.failed, VerifyCheck::algebra);
    }
}

TEST(ProveVerify, WrongChallengeFailsChallengeCheck) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(425).seed256(), p);
    Rng rng = Rng::from_u64(426);
    auto g = gradient_with_norm(p.d, 0.5 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    NormProof pr = prove_norm(key, qg, p, rng);
    pr.c = p.challenge_offset + (pr.c - p.challenge_offset + 1) % p.challenge_count();
    VerifyResult vr = verify_norm_detail(key, pr, p.tau, p);
    EXPECT_FALSE(vr.ok);
    EXPECT_EQ(vr.failed, VerifyCheck::challenge);
}

TEST(ProveVerify, VerifyIsStatelessAndDeterministic) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(427).seed256(), p);
    Rng rng = Rng::from_u64(428);
    auto g = gradient_with_norm(p.d, 0.5 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    NormProof pr = prove_norm(key, qg, p, rng);
    for (int t = 0; t < 5; ++t) EXPECT_TRUE(verify_norm(key, pr, p.tau, p));
}

TEST(NormProof, SerializationRoundTrip) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(429).seed256(), p);
    Rng rng = Rng::from_u64(430);
    auto g = gradient_with_norm(p.d, 0.5 * p.tau, rng);
    QuantizedGradient qg = QuantizedGradient::from_real(g, p.scale);
    NormProof pr = prove_norm(key, qg, p, rng);
    NormProof back = NormProof::from_bytes(pr.to_bytes());
    EXPECT_EQ(back.C, pr.C);
    EXPECT_EQ(back.T, pr.T);
    EXPECT_EQ(back.c, pr.c);
    EXPECT_EQ(back.z, pr.z);
    EXPECT_EQ(back.r_z, pr.r_z);
    EXPECT_TRUE(verify_norm(key, back, p.tau, p));
    EXPECT_EQ(pr.wire_size(), pr.to_bytes().size());
}

TEST(NormProof, DeterministicGivenSeed) {
    ZkpParams p = small_params();
    CommitmentKey key(Rng::from_u64(431).seed256(), p);
    Rng r1 = Rng::from_u64(432), r2 = Rng::from_u64(432);
    QuantizedGradient qg;
    qg.w.assign(p.d, 1);
    qg.scale = p.scale;
    EXPECT_EQ(prove_norm(key, qg, p, r1).to_bytes(), prove_norm(key, qg, p, r2).to_bytes());
}
