/**
 * @file protocol.hpp
 * @brief One federated round end to end, in three configurations:
 *        plain FedAvg over simulated TLS, KEM+AEAD transport, and the full
 *        pipeline (train -> prove -> encaps -> HE-encrypt -> seal on the
 *        client; decaps -> open -> verify -> aggregate -> decrypt -> update
 *        on the server), plus the Byzantine client and adaptive threshold.
 *
 * The HE secret key lives in HeDecryptor, a role separate from the
 * aggregating server, and the decryptor only accepts AggregateCiphertext
 * values produced by HeAggregator::sum — individual client ciphertexts cannot
 * reach decryption by construction.
 *
 * All randomness descends from the experiment seed; data, partition, initial
 * model and the adversary schedule derive mode-independently so the three
 * configurations are paired comparisons.
 * @license Apache-2.0
 */

#ifndef ZKFL_PROTOCOL_HPP
#define ZKFL_PROTOCOL_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "zkfl/fl.hpp"
#include "zkfl/he.hpp"
#include "zkfl/kem.hpp"
#include "zkfl/sym.hpp"
#include "zkfl/zkp.hpp"

namespace zkfl {

enum class Mode : uint8_t { standard_fl = 0, fl_kem = 1, zkfl_pq = 2 };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::standard_fl: return "standard_fl";
        case Mode::fl_kem: return "fl_kem";
        case Mode::zkfl_pq: return "zkfl_pq";
    }
    return "?";
}

inline std::optional<Mode> mode_from_name(const std::string& s) {
    if (s == "standard_fl") return Mode::standard_fl;
    if (s == "fl_kem") return Mode::fl_kem;
    if (s == "zkfl_pq") return Mode::zkfl_pq;
    return std::nullopt;
}

/// How a malicious client behaves. honest_prover runs the real prover on its
/// oversized update (which refuses), then submits without a proof; garbage
/// submits a well-formed random transcript.
enum class ByzVariant : uint8_t { honest_prover = 0, garbage = 1 };

enum class RejectReason : uint8_t {
    none = 0,
    aead_failure,
    payload_malformed,
    proof_missing,
    proof_norm_bound,
    proof_challenge,
    proof_algebra,
};

inline const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::none: return "accepted";
        case RejectReason::aead_failure: return "aead_failure";
        case RejectReason::payload_malformed: return "payload_malformed";
        case RejectReason::proof_missing: return "proof_missing";
        case RejectReason::proof_norm_bound: return "proof_norm_bound";
        case RejectReason::proof_challenge: return "proof_challenge";
        case RejectReason::proof_algebra: return "proof_algebra";
    }
    return "?";
}

struct ProtocolConfig {
    Mode mode = Mode::zkfl_pq;
    uint32_t rounds = 10;
    uint32_t n_clients = 5;
    double tau = 5.0;
    bool adaptive_tau = false;
    double adaptive_k = 2.0;
    std::set<uint32_t> malicious_ids = {3};
    uint32_t malicious_start_round = 4;  ///< 1-indexed; 0 disables
    double malicious_scale = 50.0;
    ByzVariant byz_variant = ByzVariant::honest_prover;
    uint32_t he_coverage = 512;   ///< leading parameters carried through HE
    double quant_scale = 256.0;   ///< fixed-point scale for transport and proof
    double server_eta = 1.0;
    uint64_t seed = 42;
    uint32_t epochs = 3;
    double lr = 0.01;
    uint32_t batch = 32;
    double alpha = 0.5;
    uint32_t data_samples = 1000;
    bool deterministic_timing = false;

    void validate() const {
        if (n_clients < 1) throw std::invalid_argument("config: n_clients must be >= 1");
        if (tau <= 0) throw std::invalid_argument("config: tau must be positive");
        if (quant_scale <= 0) throw std::invalid_argument("config: quant_scale must be positive");
        if (he_coverage > MlpModel::kParamCount)
            throw std::invalid_argument("config: he_coverage exceeds model size");
        for (uint32_t id : malicious_ids)
            if (id >= n_clients) throw std::invalid_argument("config: malicious id out of range");
        if (malicious_ids.size() >= n_clients && !malicious_ids.empty())
            throw std::invalid_argument("config: no honest quorum");
        if (batch < 1 || epochs < 1) throw std::invalid_argument("config: epochs/batch must be >= 1");
    }

    bool is_malicious(uint32_t client, uint32_t round) const {
        return malicious_start_round > 0 && round >= malicious_start_round && malicious_ids.count(client) > 0;
    }
};

// ---------------------------------------------------------------------------
// HE aggregation roles
// ---------------------------------------------------------------------------

class HeAggregator;

/// A ciphertext that provably went through the aggregator. Only these reach
/// the decryptor.
class AggregateCiphertext {
public:
    const std::vector<HeCiphertext>& blocks() const { return blocks_; }
    uint32_t contributors() const { return contributors_; }

private:
    friend class HeAggregator;
    AggregateCiphertext(std::vector<HeCiphertext> blocks, uint32_t n) : blocks_(std::move(blocks)), contributors_(n) {}
    std::vector<HeCiphertext> blocks_;
    uint32_t contributors_;
};

class HeAggregator {
public:
    /// Block-wise homomorphic sum over the accepted clients' ciphertexts.
    static AggregateCiphertext sum(const BfvParams& p, const std::vector<std::vector<HeCiphertext>>& per_client) {
        if (per_client.empty()) throw std::invalid_argument("aggregate: empty contributor set");
        std::vector<HeCiphertext> acc = per_client[0];
        for (size_t i = 1; i < per_client.size(); ++i) {
            if (per_client[i].size() != acc.size()) throw std::invalid_argument("aggregate: block count mismatch");
            for (size_t b = 0; b < acc.size(); ++b) acc[b] = bfv_add(p, acc[b], per_client[i][b]);
        }
        return AggregateCiphertext(std::move(acc), static_cast<uint32_t>(per_client.size()));
    }
};

/// Holds the BFV secret key (the trusted-decryptor role). Decrypts only
/// aggregated ciphertexts.
class HeDecryptor {
public:
    explicit HeDecryptor(BfvKeyPair kp) : kp_(std::move(kp)) {}

    const BfvPublicKey& public_key() const { return kp_.pk; }

    std::vector<QuantizedBlock> decrypt(const BfvParams& p, const AggregateCiphertext& agg, double scale) const {
        std::vector<QuantizedBlock> out;
        out.reserve(agg.blocks().size());
        for (const auto& ct : agg.blocks()) out.push_back(bfv_decrypt(p, kp_.sk, ct, scale));
        return out;
    }

    /// Test-only escape hatch for key material inspection.
    const BfvSecretKey& secret_key_for_tests() const { return kp_.sk; }

private:
    BfvKeyPair kp_;
};

// ---------------------------------------------------------------------------
// Messages and records
// ---------------------------------------------------------------------------

struct ClientMessage {
    uint32_t client_id = 0;
    // zkfl_pq / fl_kem transport
    std::optional<KemCiphertext> kem_ct;
    std::optional<SealedPayload> sealed;
    // standard_fl sends the raw update in the clear
    std::vector<double> raw_update;
    size_t wire_bytes = 0;
};

struct ClientOutcome {
    uint32_t id = 0;
    bool malicious = false;
    bool accepted = false;
    RejectReason reason = RejectReason::none;
    double update_norm = 0;  ///< true l2 norm of what the client built
    size_t bytes = 0;
};

struct RoundRecord {
    uint32_t round = 0;
    Mode mode = Mode::standard_fl;
    double accuracy = 0;
    double loss = 0;
    double t_train_kem = 0;
    double t_he_enc = 0;
    double t_he_agg = 0;
    double t_he_dec = 0;
    double t_zkp_gen = 0;
    double t_zkp_verify = 0;
    size_t bytes_total = 0;
    uint32_t n_accepted = 0;
    uint32_t n_rejected = 0;
    std::vector<ClientOutcome> outcomes;
    double tau_used = 0;
    double he_mae = 0;      ///< covered slice: mean |HE average - plaintext oracle average|
    double he_rel_err = 0;  ///< he_mae relative to the covered weight slice's mean magnitude
    bool skipped = false;   ///< true when S_valid was empty

    double total_time() const {
        return t_train_kem + t_he_enc + t_he_agg + t_he_dec + t_zkp_gen + t_zkp_verify;
    }
};

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

/// Random gradient scaled by `scale`; at the default dimension its norm
/// concentrates near scale * sqrt(d) (~16,500 for scale 50).
inline GradientUpdate byzantine_update(size_t dim, double scale, Rng& rng) {
    GradientUpdate u;
    u.delta.resize(dim);
    for (auto& v : u.delta) v = rng.gaussian() * scale;
    return u;
}

struct InsufficientHistory : std::runtime_error {
    InsufficientHistory() : std::runtime_error("adaptive threshold: need >= 2 accepted norms") {}
};

/// mu + k * sigma of the previous round's accepted norms (population stddev).
inline double adaptive_threshold(std::span<const double> prev_norms, double k) {
    if (prev_norms.size() < 2) throw InsufficientHistory();
    double mean = 0;
    for (double v : prev_norms) mean += v;
    mean /= static_cast<double>(prev_norms.size());
    double var = 0;
    for (double v : prev_norms) var += (v - mean) * (v - mean);
    var /= static_cast<double>(prev_norms.size());
    return mean + k * std::sqrt(var);
}

/// Fixed per-message latency model for the plain-TLS baseline: base handshake
/// cost plus a per-byte term. Documented constants; accuracy is unaffected.
inline double simulate_tls_baseline(size_t payload_bytes) {
    constexpr double kBaseSeconds = 2e-3;
    constexpr double kPerByteSeconds = 2e-9;
    return kBaseSeconds + kPerByteSeconds * static_cast<double>(payload_bytes);
}

// ---------------------------------------------------------------------------
// Simulation state
// ---------------------------------------------------------------------------

struct SimState {
    ProtocolConfig cfg;
    Dataset data;
    std::vector<ClientShard> shards;
    MlpModel model;

    KemParams kem_params;
    KemKeyPair server_kem;
    BfvParams he_params;
    BfvPublicKey he_pk;
    std::optional<HeDecryptor> decryptor;
    ZkpParams zkp_params;
    std::optional<CommitmentKey> commit_key;

    Seed256 master_seed{};
    uint32_t next_round = 1;
    std::vector<double> last_accepted_norms;

    Rng derive_rng(std::string_view label, uint64_t i0 = 0, uint64_t i1 = 0) const {
        return Rng(master_seed).derive(label, i0, i1);
    }
};

inline SimState init_experiment(const ProtocolConfig& cfg) {
    cfg.validate();
    SimState st;
    st.cfg = cfg;
    st.master_seed = Rng::seed_from_u64(cfg.seed);
    st.data = generate_dataset(cfg.seed, cfg.data_samples);
    st.shards = partition_dirichlet(st.data, static_cast<int>(cfg.n_clients), cfg.alpha, cfg.seed);
    {
        // fan-in-scaled uniform init with a deliberately hot gain: round one
        // spends most of its movement unwinding the init, which puts honest
        // update norms in the low single digits before convergence
        constexpr double kInitGain = 6.0;
        Rng mr = st.derive_rng("model-init");
        st.model = MlpModel::init(mr, kInitGain);
    }
    st.kem_params = KemParams::standard();
    {
        Rng kr = st.derive_rng("server-kem");
        st.server_kem = kem_keygen(st.kem_params, kr);
    }
    st.he_params = BfvParams::standard();
    {
        Rng hr = st.derive_rng("he-keys");
        BfvKeyPair kp = bfv_keygen(st.he_params, hr);
        st.he_pk = kp.pk;
        st.decryptor.emplace(std::move(kp));
    }
    st.zkp_params = ZkpParams{};
    st.zkp_params.d = MlpModel::kParamCount;
    st.zkp_params.tau = cfg.tau;
    st.zkp_params.scale = cfg.quant_scale;
    st.commit_key.emplace(Rng(st.master_seed).derive_seed("zkp-key"), st.zkp_params);
    return st;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Centered value -> mod-t residue; malicious payloads clip into range.
inline uint64_t to_mod_t(int64_t v, uint64_t t, bool clip) {
    int64_t half = static_cast<int64_t>(t / 2);
    if (v >= half || v < -half) {
        if (!clip) throw std::overflow_error("transport: quantized value out of range");
        v = std::clamp(v, -half + 1, half - 1);
    }
    return mod_q(v, t);
}

struct ZkflBody {
    std::vector<std::vector<uint8_t>> ct_blobs;
    std::vector<uint64_t> remainder;  // mod-t residues
    bool proof_present = false;
    Bytes proof_bytes;

    Bytes to_bytes() const {
        ByteWriter w;
        w.put_u8(1);  // payload format version
        w.put_u8(proof_present ? 1 : 0);
        w.put_u32(static_cast<uint32_t>(ct_blobs.size()));
        for (const auto& b : ct_blobs) {
            w.put_u32(static_cast<uint32_t>(b.size()));
            w.put_bytes(b);
        }
        w.put_u32(static_cast<uint32_t>(remainder.size()));
        for (uint64_t v : remainder) w.put_u16(static_cast<uint16_t>(v));
        if (proof_present) {
            w.put_u32(static_cast<uint32_t>(proof_bytes.size()));
            w.put_bytes(proof_bytes);
        }
        return w.take();
    }

    static ZkflBody from_bytes(std::span<const uint8_t> b) {
        ByteReader r(b);
        if (r.get_u8() != 1) throw std::runtime_error("payload: unsupported version");
        ZkflBody out;
        out.proof_present = r.get_u8() != 0;
        uint32_t n_cts = r.get_u32();
        for (uint32_t i = 0; i < n_cts; ++i) {
            uint32_t len = r.get_u32();
            out.ct_blobs.push_back(r.get_bytes(len));
        }
        uint32_t n_rem = r.get_u32();
        out.remainder.resize(n_rem);
        for (auto& v : out.remainder) v = r.get_u16();
        if (out.proof_present) {
            uint32_t len = r.get_u32();
            out.proof_bytes = r.get_bytes(len);
        }
        if (!r.done()) throw std::runtime_error("payload: trailing bytes");
        return out;
    }
};

inline Bytes floats_to_body(std::span<const double> v) {
    ByteWriter w;
    w.put_u32(static_cast<uint32_t>(v.size()));
    for (double x : v) w.put_f64(x);
    return w.take();
}

inline std::vector<double> body_to_floats(std::span<const uint8_t> b) {
    ByteReader r(b);
    uint32_t n = r.get_u32();
    std::vector<double> v(n);
    for (auto& x : v) x = r.get_f64();
    if (!r.done()) throw std::runtime_error("payload: trailing bytes");
    return v;
}

inline NormProof garbage_proof(const ZkpParams& p, Rng& rng) {
    NormProof pr;
    pr.C.resize(p.m);
    pr.T.resize(p.m);
    for (auto& v : pr.C) v = rng.below(p.q);
    for (auto& v : pr.T) v = rng.below(p.q);
    pr.c = p.challenge_offset + static_cast<uint32_t>(rng.below(p.challenge_count()));
    auto z = sample_gaussian_vec(p.d, p.sigma_y(), rng);
    pr.z.assign(z.begin(), z.end());
    pr.r_z.resize(p.ell);
    for (auto& v : pr.r_z) v = rng.below(p.q);
    return pr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Server-side message processing (zkfl_pq)
// ---------------------------------------------------------------------------

struct ServerDecision {
    bool accepted = false;
    RejectReason reason = RejectReason::none;
    std::vector<HeCiphertext> cts;
    std::vector<uint64_t> remainder;
    double open_seconds = 0;
    double verify_seconds = 0;
};

/// Decaps, open, parse and verify one zkfl_pq client message. A client is
/// accepted iff its payload authenticates AND its proof passes all three
/// checks at the round threshold.
inline ServerDecision server_process_message(const SimState& st, const ZkpParams& round_zkp, double tau_used,
                                             size_t covered, const ClientMessage& msg) {
    ServerDecision dec;
    auto t0 = detail::Clock::now();
    SessionKey key = kem_decaps(st.kem_params, st.server_kem.dk, *msg.kem_ct);
    Bytes body_bytes;
    try {
        body_bytes = open(key, *msg.sealed);
    } catch (const AeadError&) {
        dec.open_seconds = detail::seconds_since(t0);
        dec.reason = RejectReason::aead_failure;
        return dec;
    }
    dec.open_seconds = detail::seconds_since(t0);

    detail::ZkflBody body;
    try {
        body = detail::ZkflBody::from_bytes(body_bytes);
    } catch (const std::exception&) {
        dec.reason = RejectReason::payload_malformed;
        return dec;
    }
    if (!body.proof_present) {
        dec.reason = RejectReason::proof_missing;
        return dec;
    }

    auto tv = detail::Clock::now();
    NormProof proof;
    try {
        proof = NormProof::from_bytes(body.proof_bytes);
    } catch (const std::exception&) {
        dec.verify_seconds = detail::seconds_since(tv);
        dec.reason = RejectReason::payload_malformed;
        return dec;
    }
    VerifyResult vr = verify_norm_detail(*st.commit_key, proof, tau_used, round_zkp);
    dec.verify_seconds = detail::seconds_since(tv);
    if (!vr.ok) {
        switch (vr.failed) {
            case VerifyCheck::norm_bound: dec.reason = RejectReason::proof_norm_bound; break;
            case VerifyCheck::challenge: dec.reason = RejectReason::proof_challenge; break;
            default: dec.reason = RejectReason::proof_algebra; break;
        }
        return dec;
    }

    try {
        for (const auto& blob : body.ct_blobs) dec.cts.push_back(HeCiphertext::from_bytes(st.he_params, blob));
    } catch (const std::exception&) {
        dec.cts.clear();
        dec.reason = RejectReason::payload_malformed;
        return dec;
    }
    size_t expect_blocks = (covered + st.he_params.ring.n - 1) / st.he_params.ring.n;
    size_t dim = MlpModel::kParamCount;
    if (dec.cts.size() != expect_blocks || body.remainder.size() != dim - covered) {
        dec.reason = RejectReason::payload_malformed;
        return dec;
    }
    dec.remainder = std::move(body.remainder);
    dec.accepted = true;
    return dec;
}

// ---------------------------------------------------------------------------
// One round
// ---------------------------------------------------------------------------

inline RoundRecord run_round(SimState& st, uint32_t round) {
    const ProtocolConfig& cfg = st.cfg;
    const size_t dim = MlpModel::kParamCount;
    const size_t covered = cfg.mode == Mode::zkfl_pq ? cfg.he_coverage : 0;
    const uint64_t t_mod = st.he_params.t;

    RoundRecord rec;
    rec.round = round;
    rec.mode = cfg.mode;
    rec.tau_used = cfg.tau;
    if (cfg.mode == Mode::zkfl_pq && cfg.adaptive_tau && round > 1) {
        try {
            rec.tau_used = adaptive_threshold(st.last_accepted_norms, cfg.adaptive_k);
        } catch (const InsufficientHistory&) {
            rec.tau_used = cfg.tau;  // fall back to the static threshold
        }
    }

    ZkpParams round_zkp = st.zkp_params;
    round_zkp.tau = rec.tau_used;

    // ---- client phase -----------------------------------------------------
    struct Submission {
        ClientMessage msg;
        ClientOutcome outcome;
        std::vector<double> true_update;  // oracle bookkeeping only
    };
    std::vector<Submission> subs(cfg.n_clients);

    for (uint32_t id = 0; id < cfg.n_clients; ++id) {
        Submission& sub = subs[id];
        sub.outcome.id = id;
        sub.outcome.malicious = cfg.is_malicious(id, round);

        auto t0 = detail::Clock::now();
        GradientUpdate upd;
        if (sub.outcome.malicious) {
            Rng byz_rng = st.derive_rng("byz", round, id);
            upd = byzantine_update(dim, cfg.malicious_scale, byz_rng);
        } else {
            Rng train_rng = st.derive_rng("train", round, id);
            upd = local_sgd(st.model, st.data, st.shards[id], cfg.epochs, cfg.lr, cfg.batch, train_rng);
        }
        upd.client_id = static_cast<int32_t>(id);
        upd.round = static_cast<int32_t>(round);
        sub.outcome.update_norm = upd.norm();
        sub.true_update = upd.delta;
        sub.msg.client_id = id;

        Rng crypt_rng = st.derive_rng(std::string("crypt-") + mode_name(cfg.mode), round, id);

        if (cfg.mode == Mode::standard_fl) {
            sub.msg.raw_update = upd.delta;
            sub.msg.wire_bytes = 8 * dim;
            rec.t_train_kem += detail::seconds_since(t0) + simulate_tls_baseline(sub.msg.wire_bytes);
            sub.outcome.bytes = sub.msg.wire_bytes;
            continue;
        }

        if (cfg.mode == Mode::fl_kem) {
            auto [kct, key] = kem_encaps(st.kem_params, st.server_kem.ek, crypt_rng);
            Bytes body = detail::floats_to_body(upd.delta);
            sub.msg.kem_ct = std::move(kct);
            sub.msg.sealed = seal(key, body, crypt_rng);
            sub.msg.wire_bytes = sub.msg.kem_ct->to_bytes().size() + sub.msg.sealed->wire_size();
            rec.t_train_kem += detail::seconds_since(t0);
            sub.outcome.bytes = sub.msg.wire_bytes;
            continue;
        }

        // zkfl_pq client pipeline
        QuantizedGradient qg = QuantizedGradient::from_real(upd.delta, cfg.quant_scale);
        rec.t_train_kem += detail::seconds_since(t0);

        detail::ZkflBody body;
        auto tz = detail::Clock::now();
        if (sub.outcome.malicious && cfg.byz_variant == ByzVariant::garbage) {
            body.proof_present = true;
            body.proof_bytes = detail::garbage_proof(round_zkp, crypt_rng).to_bytes();
        } else {
            try {
                NormProof proof = prove_norm(*st.commit_key, qg, round_zkp, crypt_rng);
                body.proof_present = true;
                body.proof_bytes = proof.to_bytes();
            } catch (const NormBoundError&) {
                body.proof_present = false;  // honest prover refuses; nothing to attach
            } catch (const RestartLimitError&) {
                body.proof_present = false;
            }
        }
        rec.t_zkp_gen += detail::seconds_since(tz);

        auto th = detail::Clock::now();
        const bool clip = sub.outcome.malicious;  // malicious payloads saturate the fixed-point range
        std::vector<QuantizedBlock> blocks;
        {
            QuantizedBlock cur;
            cur.scale = cfg.quant_scale;
            for (size_t i = 0; i < covered; ++i) {
                cur.values.push_back(detail::to_mod_t(qg.w[i], t_mod, clip));
                if (cur.values.size() == st.he_params.ring.n) {
                    blocks.push_back(std::move(cur));
                    cur = QuantizedBlock{};
                    cur.scale = cfg.quant_scale;
                }
            }
            if (!cur.values.empty()) blocks.push_back(std::move(cur));
        }
        for (const auto& blk : blocks) {
            HeCiphertext ct = bfv_encrypt(st.he_params, st.he_pk, blk, crypt_rng);
            body.ct_blobs.push_back(ct.to_bytes());
        }
        body.remainder.reserve(dim - covered);
        for (size_t i = covered; i < dim; ++i) body.remainder.push_back(detail::to_mod_t(qg.w[i], t_mod, clip));
        rec.t_he_enc += detail::seconds_since(th);

        auto tk = detail::Clock::now();
        auto [kct, key] = kem_encaps(st.kem_params, st.server_kem.ek, crypt_rng);
        sub.msg.kem_ct = std::move(kct);
        sub.msg.sealed = seal(key, body.to_bytes(), crypt_rng);
        sub.msg.wire_bytes = sub.msg.kem_ct->to_bytes().size() + sub.msg.sealed->wire_size();
        sub.outcome.bytes = sub.msg.wire_bytes;
        rec.t_train_kem += detail::seconds_since(tk);
    }

    // ---- server phase ------------------------------------------------------
    std::vector<double> agg_delta(dim, 0.0);
    bool have_update = false;

    if (cfg.mode != Mode::zkfl_pq) {
        // plain FedAvg over all submissions (no verification layer)
        for (auto& sub : subs) {
            std::vector<double> upd;
            if (cfg.mode == Mode::standard_fl) {
                upd = sub.msg.raw_update;
            } else {
                auto t0 = detail::Clock::now();
                SessionKey key = kem_decaps(st.kem_params, st.server_kem.dk, *sub.msg.kem_ct);
                try {
                    Bytes body = open(key, *sub.msg.sealed);
                    upd = detail::body_to_floats(body);
                } catch (const AeadError&) {
                    sub.outcome.accepted = false;
                    sub.outcome.reason = RejectReason::aead_failure;
                    rec.t_train_kem += detail::seconds_since(t0);
                    continue;
                }
                rec.t_train_kem += detail::seconds_since(t0);
            }
            sub.outcome.accepted = true;
            for (size_t j = 0; j < dim; ++j) agg_delta[j] += upd[j];
        }
        uint32_t n_ok = 0;
        for (auto& sub : subs)
            if (sub.outcome.accepted) ++n_ok;
        if (n_ok > 0) {
            for (auto& v : agg_delta) v /= static_cast<double>(n_ok);
            have_update = true;
        }
    } else {
        struct Accepted {
            uint32_t id;
            std::vector<HeCiphertext> cts;
            std::vector<uint64_t> remainder;
        };
        std::vector<Accepted> valid;

        for (auto& sub : subs) {
            ServerDecision dec = server_process_message(st, round_zkp, rec.tau_used, covered, sub.msg);
            rec.t_train_kem += dec.open_seconds;
            rec.t_zkp_verify += dec.verify_seconds;
            sub.outcome.accepted = dec.accepted;
            sub.outcome.reason = dec.reason;
            if (dec.accepted) valid.push_back(Accepted{sub.outcome.id, std::move(dec.cts), std::move(dec.remainder)});
        }

        if (!valid.empty()) {
            const uint32_t n_ok = static_cast<uint32_t>(valid.size());

            // homomorphic aggregation of the covered slice
            std::vector<double> covered_avg;
            if (covered > 0) {
                auto ta = detail::Clock::now();
                std::vector<std::vector<HeCiphertext>> cts;
                cts.reserve(valid.size());
                for (auto& v : valid) cts.push_back(std::move(v.cts));
                AggregateCiphertext agg = HeAggregator::sum(st.he_params, cts);
                rec.t_he_agg += detail::seconds_since(ta);

                auto td = detail::Clock::now();
                std::vector<QuantizedBlock> dec = st.decryptor->decrypt(st.he_params, agg, cfg.quant_scale);
                covered_avg = dequantize_sum(dec, cfg.quant_scale, n_ok, t_mod);
                covered_avg.resize(covered);
                rec.t_he_dec += detail::seconds_since(td);
            }

            // plaintext remainder, revealed only after verification
            std::vector<int64_t> rem_sum(dim - covered, 0);
            for (const auto& v : valid)
                for (size_t j = 0; j < rem_sum.size(); ++j)
                    rem_sum[j] += centered(v.remainder[j] % t_mod, t_mod);

            for (size_t j = 0; j < covered; ++j) agg_delta[j] = covered_avg[j];
            for (size_t j = 0; j < rem_sum.size(); ++j)
                agg_delta[covered + j] =
                    static_cast<double>(rem_sum[j]) / (cfg.quant_scale * static_cast<double>(n_ok));
            have_update = true;

            // reconstruction-error bookkeeping against the plaintext oracle
            if (covered > 0) {
                std::vector<double> oracle(covered, 0.0);
                for (const auto& v : valid)
                    for (size_t j = 0; j < covered; ++j) oracle[j] += subs[v.id].true_update[j];
                double mae = 0;
                for (size_t j = 0; j < covered; ++j) {
                    oracle[j] /= static_cast<double>(n_ok);
                    mae += std::fabs(agg_delta[j] - oracle[j]);
                }
                rec.he_mae = mae / static_cast<double>(covered);
            }

            st.last_accepted_norms.clear();
            for (const auto& v : valid) st.last_accepted_norms.push_back(subs[v.id].outcome.update_norm);
        }
    }

    if (have_update)
        st.model = apply_update(st.model, agg_delta, cfg.server_eta);
    else
        rec.skipped = true;

    // relative reconstruction error: error injected by the HE+quantization
    // path, against the magnitude of the weights it lands in (the error's
    // relative impact shrinks as updates fall below the quantization step)
    if (cfg.mode == Mode::zkfl_pq && covered > 0 && rec.he_mae > 0) {
        double wmag = 0;
        for (size_t j = 0; j < covered; ++j) wmag += std::fabs(st.model.theta[j]);
        wmag /= static_cast<double>(covered);
        rec.he_rel_err = wmag > 0 ? rec.he_mae / wmag : 0.0;
    }

    EvalResult ev = evaluate(st.model, st.data);
    rec.accuracy = ev.accuracy;
    rec.loss = ev.loss;
    for (auto& sub : subs) {
        rec.outcomes.push_back(sub.outcome);
        rec.bytes_total += sub.outcome.bytes;
        if (sub.outcome.accepted)
            ++rec.n_accepted;
        else
            ++rec.n_rejected;
    }
    if (cfg.deterministic_timing) {
        rec.t_train_kem = rec.t_he_enc = rec.t_he_agg = rec.t_he_dec = rec.t_zkp_gen = rec.t_zkp_verify = 0;
    }
    st.next_round = round + 1;
    return rec;
}

/// Runs the configured number of rounds from a fresh state.
inline std::vector<RoundRecord> run_experiment(const ProtocolConfig& cfg) {
    SimState st = init_experiment(cfg);
    std::vector<RoundRecord> records;
    records.reserve(cfg.rounds);
    for (uint32_t r = 1; r <= cfg.rounds; ++r) records.push_back(run_round(st, r));
    return records;
}

}  // namespace zkfl

#endif  // ZKFL_PROTOCOL_HPP
