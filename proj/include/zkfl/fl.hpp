/**
 * @file fl.hpp
 * @brief Machine-learning substrate for the simulator: synthetic 28x28
 *        imaging-style dataset (class-conditional Gaussians with spatial
 *        smoothing), Dirichlet non-IID partitioning, a 784-128-64-4 MLP
 *        (108,996 parameters), local SGD and evaluation.
 *
 * Everything is deterministic given a seed. Doubles throughout so gradient
 * checks against finite differences are meaningful.
 * @license Apache-2.0
 */

#ifndef ZKFL_FL_HPP
#define ZKFL_FL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zkfl/bytes.hpp"
#include "zkfl/rng.hpp"

namespace zkfl {

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct Dataset {
    static constexpr uint32_t kFeatures = 784;  // 28 x 28
    static constexpr uint32_t kClasses = 4;
    static constexpr uint32_t kSide = 28;

    uint64_t seed = 0;
    std::vector<double> x;  ///< n_samples * kFeatures, row-major
    std::vector<int32_t> y;
    std::vector<int32_t> train_idx;
    std::vector<int32_t> test_idx;

    size_t n_samples() const { return y.size(); }
    std::span<const double> row(size_t i) const { return {x.data() + i * kFeatures, kFeatures}; }

    static constexpr char kMagic[8] = {'Z', 'K', 'F', 'L', 'D', 'S', '0', '1'};

    void save(const std::string& path) const {
        ByteWriter w;
        w.put_bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(kMagic), 8));
        w.put_u32(1);  // format version
        w.put_u64(seed);
        w.put_u32(static_cast<uint32_t>(n_samples()));
        w.put_u32(kFeatures);
        w.put_u32(kClasses);
        for (double v : x) w.put_f64(v);
        for (int32_t v : y) w.put_i32(v);
        w.put_u32(static_cast<uint32_t>(train_idx.size()));
        for (int32_t v : train_idx) w.put_i32(v);
        w.put_u32(static_cast<uint32_t>(test_idx.size()));
        for (int32_t v : test_idx) w.put_i32(v);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("dataset: cannot open " + path);
        f.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.size()));
    }

    static Dataset load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("dataset: cannot open " + path);
        Bytes b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        ByteReader r(b);
        Bytes magic = r.get_bytes(8);
        if (std::memcmp(magic.data(), kMagic, 8) != 0) throw std::runtime_error("dataset: bad magic");
        if (r.get_u32() != 1) throw std::runtime_error("dataset: unsupported version");
        Dataset d;
        d.seed = r.get_u64();
        uint32_t n = r.get_u32();
        if (r.get_u32() != kFeatures || r.get_u32() != kClasses)
            throw std::runtime_error("dataset: dimension mismatch");
        d.x.resize(size_t(n) * kFeatures);
        for (auto& v : d.x) v = r.get_f64();
        d.y.resize(n);
        for (auto& v : d.y) v = r.get_i32();
        d.train_idx.resize(r.get_u32());
        for (auto& v : d.train_idx) v = r.get_i32();
        d.test_idx.resize(r.get_u32());
        for (auto& v : d.test_idx) v = r.get_i32();
        return d;
    }
};

namespace detail {

/// Separable Gaussian blur on a 28x28 grid with clamped borders; this is the
/// fixed spatial-correlation construction of the generator.
inline void blur_grid(std::vector<double>& img, double sigma) {
    const int side = Dataset::kSide;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (auto& k : kernel) k /= sum;
    std::vector<double> tmp(img.size());
    auto clamp = [&](int v) { return std::min(std::max(v, 0), side - 1); };
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            double acc = 0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img[r * side + clamp(c + k)];
            tmp[r * side + c] = acc;
        }
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            double acc = 0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[clamp(r + k) * side + c];
            img[r * side + c] = acc;
        }
}

inline std::vector<double> smooth_field(Rng& rng, double sigma_blur, double rms) {
    std::vector<double> f(Dataset::kFeatures);
    for (auto& v : f) v = rng.gaussian();
    blur_grid(f, sigma_blur);
    double ss = 0;
    for (double v : f) ss += v * v;
    double cur = std::sqrt(ss / f.size());
    if (cur > 0)
        for (auto& v : f) v *= rms / cur;
    return f;
}

}  // namespace detail

/// 1,000 samples, 784 features, 4 classes: smooth per-class mean fields plus
/// smooth per-sample noise, stratified 80/20 train/test split. The task is
/// deliberately easy to separate.
inline Dataset generate_dataset(uint64_t seed, uint32_t n_samples = 1000) {
    constexpr double kMeanRms = 2.0;
    constexpr double kNoiseRms = 0.9;
    constexpr double kBlurSigma = 2.5;

    Dataset d;
    d.seed = seed;
    Rng root = Rng::from_u64(seed).derive("zkfl/data/v1");

    std::vector<std::vector<double>> means;
    Rng mean_rng = root.derive("means");
    for (uint32_t c = 0; c < Dataset::kClasses; ++c)
        means.push_back(detail::smooth_field(mean_rng, kBlurSigma, kMeanRms));

    Rng label_rng = root.derive("labels");
    Rng noise_rng = root.derive("noise");
    d.x.resize(size_t(n_samples) * Dataset::kFeatures);
    d.y.resize(n_samples);
    for (uint32_t i = 0; i < n_samples; ++i) {
        uint32_t c = static_cast<uint32_t>(label_rng.below(Dataset::kClasses));
        d.y[i] = static_cast<int32_t>(c);
        auto noise = detail::smooth_field(noise_rng, kBlurSigma, kNoiseRms);
        for (uint32_t j = 0; j < Dataset::kFeatures; ++j)
            d.x[size_t(i) * Dataset::kFeatures + j] = means[c][j] + noise[j];
    }

    // stratified 80/20 split
    Rng split_rng = root.derive("split");
    for (uint32_t c = 0; c < Dataset::kClasses; ++c) {
        std::vector<int32_t> idx;
        for (uint32_t i = 0; i < n_samples; ++i)
            if (d.y[i] == static_cast<int32_t>(c)) idx.push_back(static_cast<int32_t>(i));
        for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[split_rng.below(i)]);
        size_t n_train = (idx.size() * 8 + 5) / 10;
        for (size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? d.train_idx : d.test_idx).push_back(idx[i]);
    }
    std::sort(d.train_idx.begin(), d.train_idx.end());
    std::sort(d.test_idx.begin(), d.test_idx.end());
    return d;
}

// ---------------------------------------------------------------------------
// Dirichlet partitioning
// ---------------------------------------------------------------------------

struct ClientShard {
    int32_t client_id = 0;
    std::vector<int32_t> idx;  ///< indices into the training split
};

namespace detail {

/// Marsaglia-Tsang gamma sampler (shape a, unit scale).
inline double sample_gamma(double a, Rng& rng) {
    if (a < 1.0) {
        double u;
        do {
            u = rng.real01();
        } while (u <= 0.0);
        return sample_gamma(a + 1.0, rng) * std::pow(u, 1.0 / a);
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double g_draw, v;
        do {
            g_draw = rng.gaussian();
            v = 1.0 + c * g_draw;
        } while (v <= 0.0);
        v = v * v * v;
        double u;
        do {
            u = rng.real01();
        } while (u <= 0.0);
        if (std::log(u) < 0.5 * g_draw * g_draw + d - d * v + d * std::log(v)) return d * v;
    }
}

inline std::vector<double> sample_dirichlet(double alpha, size_t k, Rng& rng) {
    std::vector<double> p(k);
    double sum = 0;
    for (auto& v : p) {
        v = sample_gamma(alpha, rng);
        sum += v;
    }
    if (sum <= 0) return std::vector<double>(k, 1.0 / static_cast<double>(k));
    for (auto& v : p) v /= sum;
    return p;
}

}  // namespace detail

/// Per-class proportions ~ Dirichlet(alpha) across clients; shards partition
/// the training split and every client receives at least one sample
/// (degenerate draws are resampled).
inline std::vector<ClientShard> partition_dirichlet(const Dataset& d, int n_clients, double alpha, uint64_t seed) {
    if (n_clients < 1) throw std::invalid_argument("partition: need at least one client");
    Rng root = Rng::from_u64(seed).derive("zkfl/partition/v1");
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng = root.derive("attempt", static_cast<uint64_t>(attempt));
        std::vector<ClientShard> shards(n_clients);
        for (int i = 0; i < n_clients; ++i) shards[i].client_id = i;

        for (uint32_t c = 0; c < Dataset::kClasses; ++c) {
            std::vector<int32_t> idx;
            for (int32_t t : d.train_idx)
                if (d.y[t] == static_cast<int32_t>(c)) idx.push_back(t);
            for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);

            auto prop = detail::sample_dirichlet(alpha, n_clients, rng);
            // largest-remainder allocation of idx.size() samples
            std::vector<size_t> count(n_clients, 0);
            std::vector<std::pair<double, int>> rem;
            size_t assigned = 0;
            for (int i = 0; i < n_clients; ++i) {
                double exact = prop[i] * static_cast<double>(idx.size());
                count[i] = static_cast<size_t>(exact);
                assigned += count[i];
                rem.push_back({exact - std::floor(exact), i});
            }
            std::sort(rem.begin(), rem.end(), [](auto& a, auto& b) {
                return a.first != b.first ? a.first > b.first : a.second < b.second;
            });
            for (size_t i = 0; assigned < idx.size(); ++i, ++assigned) count[rem[i % rem.size()].second]++;

            size_t pos = 0;
            for (int i = 0; i < n_clients; ++i)
                for (size_t k = 0; k < count[i]; ++k) shards[i].idx.push_back(idx[pos++]);
        }

        bool ok = true;
        for (const auto& s : shards)
            if (s.idx.empty()) ok = false;
        if (ok) {
            for (auto& s : shards) std::sort(s.idx.begin(), s.idx.end());
            return shards;
        }
    }
    throw std::runtime_error("partition: degenerate draws persisted");
}

// ---------------------------------------------------------------------------
// MLP 784 -> 128 -> 64 -> 4
// ---------------------------------------------------------------------------

class MlpModel {
public:
    static constexpr uint32_t kIn = 784, kH1 = 128, kH2 = 64, kOut = 4;
    static constexpr size_t kW1 = 0;
    static constexpr size_t kB1 = kW1 + size_t(kH1) * kIn;       // 100352
    static constexpr size_t kW2 = kB1 + kH1;                     // 100480
    static constexpr size_t kB2 = kW2 + size_t(kH2) * kH1;       // 108672
    static constexpr size_t kW3 = kB2 + kH2;                     // 108736
    static constexpr size_t kB3 = kW3 + size_t(kOut) * kH2;      // 108992
    static constexpr size_t kParamCount = kB3 + kOut;            // 108996

    std::vector<double> theta;

    MlpModel() : theta(kParamCount, 0.0) {
        static_assert(kParamCount == 108996, "parameter count identity");
    }

    /// Fan-in scaled uniform init, biases zero.
    static MlpModel init(Rng& rng, double init_scale = 1.0) {
        MlpModel m;
        auto fill = [&](size_t off, size_t rows, size_t cols) {
            double s = init_scale * std::sqrt(1.0 / static_cast<double>(cols));
            for (size_t i = 0; i < rows * cols; ++i) m.theta[off + i] = (2.0 * rng.real01() - 1.0) * s;
        };
        fill(kW1, kH1, kIn);
        fill(kW2, kH2, kH1);
        fill(kW3, kOut, kH2);
        return m;
    }

    struct Forward {
        double z1[kH1], a1[kH1];
        double z2[kH2], a2[kH2];
        double z3[kOut], p[kOut];
    };

    void forward(std::span<const double> x, Forward& f) const {
        const double* t = theta.data();
        for (uint32_t u = 0; u < kH1; ++u) {
            double acc = t[kB1 + u];
            const double* w = t + kW1 + size_t(u) * kIn;
            for (uint32_t j = 0; j < kIn; ++j) acc += w[j] * x[j];
            f.z1[u] = acc;
            f.a1[u] = acc > 0 ? acc : 0;
        }
        for (uint32_t u = 0; u < kH2; ++u) {
            double acc = t[kB2 + u];
            const double* w = t + kW2 + size_t(u) * kH1;
            for (uint32_t j = 0; j < kH1; ++j) acc += w[j] * f.a1[j];
            f.z2[u] = acc;
            f.a2[u] = acc > 0 ? acc : 0;
        }
        for (uint32_t u = 0; u < kOut; ++u) {
            double acc = t[kB3 + u];
            const double* w = t + kW3 + size_t(u) * kH2;
            for (uint32_t j = 0; j < kH2; ++j) acc += w[j] * f.a2[j];
            f.z3[u] = acc;
        }
        double zmax = *std::max_element(f.z3, f.z3 + kOut);
        double sum = 0;
        for (uint32_t u = 0; u < kOut; ++u) {
            f.p[u] = std::exp(f.z3[u] - zmax);
            sum += f.p[u];
        }
        for (uint32_t u = 0; u < kOut; ++u) f.p[u] /= sum;
    }

    /// Mean cross-entropy loss and gradient over a batch; grad is accumulated
    /// into `g` (resized and zeroed here).
    double batch_gradient(const Dataset& d, std::span<const int32_t> batch, std::vector<double>& g) const {
        g.assign(kParamCount, 0.0);
        Forward f;
        double loss = 0;
        double d1[kH1], d2[kH2], d3[kOut];
        for (int32_t idx : batch) {
            auto x = d.row(static_cast<size_t>(idx));
            forward(x, f);
            int32_t label = d.y[static_cast<size_t>(idx)];
            loss += -std::log(std::max(f.p[label], 1e-300));

            for (uint32_t u = 0; u < kOut; ++u) d3[u] = f.p[u] - (static_cast<int32_t>(u) == label ? 1.0 : 0.0);
            for (uint32_t u = 0; u < kH2; ++u) {
                double acc = 0;
                for (uint32_t o = 0; o < kOut; ++o) acc += theta[kW3 + size_t(o) * kH2 + u] * d3[o];
                d2[u] = f.z2[u] > 0 ? acc : 0.0;
            }
            for (uint32_t u = 0; u < kH1; ++u) {
                double acc = 0;
                for (uint32_t o = 0; o < kH2; ++o) acc += theta[kW2 + size_t(o) * kH1 + u] * d2[o];
                d1[u] = f.z1[u] > 0 ? acc : 0.0;
            }

            for (uint32_t o = 0; o < kOut; ++o) {
                double* gw = g.data() + kW3 + size_t(o) * kH2;
                for (uint32_t j = 0; j < kH2; ++j) gw[j] += d3[o] * f.a2[j];
                g[kB3 + o] += d3[o];
            }
            for (uint32_t o = 0; o < kH2; ++o) {
                double* gw = g.data() + kW2 + size_t(o) * kH1;
                for (uint32_t j = 0; j < kH1; ++j) gw[j] += d2[o] * f.a1[j];
                g[kB2 + o] += d2[o];
            }
            for (uint32_t o = 0; o < kH1; ++o) {
                double* gw = g.data() + kW1 + size_t(o) * kIn;
                if (d1[o] != 0.0)
                    for (uint32_t j = 0; j < kIn; ++j) gw[j] += d1[o] * x[j];
                g[kB1 + o] += d1[o];
            }
        }
        double inv = 1.0 / static_cast<double>(batch.size());
        for (auto& v : g) v *= inv;
        return loss * inv;
    }
};

struct GradientUpdate {
    std::vector<double> delta;
    int32_t client_id = -1;
    int32_t round = 0;

    double norm() const {
        double s = 0;
        for (double v : delta) s += v * v;
        return std::sqrt(s);
    }
};

/// Runs the prescribed epochs of minibatch SGD on a copy of the model and
/// returns delta = w_after - w_before; the input model is unchanged.
inline GradientUpdate local_sgd(const MlpModel& model, const Dataset& d, const ClientShard& shard,
                                uint32_t epochs, double lr, uint32_t batch, Rng& rng) {
    if (shard.idx.empty()) throw std::invalid_argument("local_sgd: empty shard");
    MlpModel work = model;
    std::vector<int32_t> order = shard.idx;
    std::vector<double> g;
    for (uint32_t e = 0; e < epochs; ++e) {
        for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (size_t off = 0; off < order.size(); off += batch) {
            size_t len = std::min<size_t>(batch, order.size() - off);
            work.batch_gradient(d, {order.data() + off, len}, g);
            for (size_t j = 0; j < MlpModel::kParamCount; ++j) work.theta[j] -= lr * g[j];
        }
    }
    GradientUpdate u;
    u.client_id = shard.client_id;
    u.delta.resize(MlpModel::kParamCount);
    for (size_t j = 0; j < MlpModel::kParamCount; ++j) u.delta[j] = work.theta[j] - model.theta[j];
    return u;
}

inline MlpModel apply_update(const MlpModel& model, std::span<const double> delta, double eta) {
    if (delta.size() != MlpModel::kParamCount) throw std::invalid_argument("apply_update: length mismatch");
    MlpModel out = model;
    for (size_t j = 0; j < MlpModel::kParamCount; ++j) out.theta[j] += eta * delta[j];
    return out;
}

struct EvalResult {
    double accuracy = 0;
    double loss = 0;
};

/// Test-split accuracy and mean cross-entropy.
inline EvalResult evaluate(const MlpModel& model, const Dataset& d) {
    MlpModel::Forward f;
    size_t correct = 0;
    double loss = 0;
    for (int32_t idx : d.test_idx) {
        model.forward(d.row(static_cast<size_t>(idx)), f);
        int32_t label = d.y[static_cast<size_t>(idx)];
        int best = 0;
        for (uint32_t u = 1; u < MlpModel::kOut; ++u)
            if (f.p[u] > f.p[best]) best = static_cast<int>(u);
        if (best == label) ++correct;
        loss += -std::log(std::max(f.p[label], 1e-300));
    }
    EvalResult r;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(d.test_idx.size());
    r.loss = loss / static_cast<double>(d.test_idx.size());
    return r;
}

/// Plain centralized SGD on the whole training split (used by the dataset
/// separability check).
inline MlpModel train_centralized(const Dataset& d, uint32_t epochs, double lr, uint32_t batch, Rng& rng) {
    MlpModel m = MlpModel::init(rng);
    std::vector<int32_t> order = d.train_idx;
    std::vector<double> g;
    for (uint32_t e = 0; e < epochs; ++e) {
        for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (size_t off = 0; off < order.size(); off += batch) {
            size_t len = std::min<size_t>(batch, order.size() - off);
            m.batch_gradient(d, {order.data() + off, len}, g);
            for (size_t j = 0; j < MlpModel::kParamCount; ++j) m.theta[j] -= lr * g[j];
        }
    }
    return m;
}

}  // namespace zkfl

#endif  // ZKFL_FL_HPP
