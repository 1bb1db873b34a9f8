/**
 * @file config.hpp
 * @brief Flat key=value scenario files. Unknown keys and malformed values are
 *        config errors (CLI exit code 2).
 * @license Apache-2.0
 */

#ifndef ZKFL_CONFIG_HPP
#define ZKFL_CONFIG_HPP

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zkfl/protocol.hpp"

namespace zkfl {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// A scenario: the protocol configuration plus which modes to run.
struct RunConfig {
    ProtocolConfig proto;
    std::vector<Mode> modes = {Mode::standard_fl, Mode::fl_kem, Mode::zkfl_pq};

    static RunConfig defaults() { return RunConfig{}; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for " + key + ": " + v);
}

template <typename T>
inline T parse_num(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    T out;
    ss >> out;
    if (ss.fail()) throw ConfigError("bad value for " + key + ": " + v);
    std::string rest;
    ss >> rest;
    if (!rest.empty()) throw ConfigError("trailing junk for " + key + ": " + v);
    return out;
}

}  // namespace detail

/// Parse `key = value` lines; '#' starts a comment; blank lines ignored.
inline std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError("duplicate key " + key);
        kv[key] = val;
    }
    return kv;
}

inline RunConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    RunConfig rc;
    ProtocolConfig& p = rc.proto;
    for (const auto& [key, val] : kv) {
        if (key == "mode") {
            if (val == "all") {
                rc.modes = {Mode::standard_fl, Mode::fl_kem, Mode::zkfl_pq};
            } else if (auto m = mode_from_name(val)) {
                rc.modes = {*m};
            } else {
                throw ConfigError("unknown mode: " + val);
            }
        } else if (key == "rounds") {
            p.rounds = detail::parse_num<uint32_t>(val, key);
        } else if (key == "n_clients") {
            p.n_clients = detail::parse_num<uint32_t>(val, key);
            if (p.n_clients == 0) throw ConfigError("n_clients must be >= 1");
        } else if (key == "tau") {
            p.tau = detail::parse_num<double>(val, key);
        } else if (key == "adaptive_tau") {
            p.adaptive_tau = detail::parse_bool(val, key);
        } else if (key == "adaptive_k") {
            p.adaptive_k = detail::parse_num<double>(val, key);
        } else if (key == "malicious_ids") {
            p.malicious_ids.clear();
            if (!val.empty() && val != "none") {
                std::istringstream ss(val);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    p.malicious_ids.insert(detail::parse_num<uint32_t>(detail::trim(tok), key));
            }
        } else if (key == "malicious_start_round") {
            p.malicious_start_round = detail::parse_num<uint32_t>(val, key);
        } else if (key == "malicious_scale") {
            p.malicious_scale = detail::parse_num<double>(val, key);
        } else if (key == "byzantine_variant") {
            if (val == "honest_prover")
                p.byz_variant = ByzVariant::honest_prover;
            else if (val == "garbage")
                p.byz_variant = ByzVariant::garbage;
            else
                throw ConfigError("unknown byzantine_variant: " + val);
        } else if (key == "he_coverage") {
            p.he_coverage = detail::parse_num<uint32_t>(val, key);
        } else if (key == "quant_scale") {
            p.quant_scale = detail::parse_num<double>(val, key);
        } else if (key == "server_eta") {
            p.server_eta = detail::parse_num<double>(val, key);
        } else if (key == "seed") {
            p.seed = detail::parse_num<uint64_t>(val, key);
        } else if (key == "epochs") {
            p.epochs = detail::parse_num<uint32_t>(val, key);
        } else if (key == "lr") {
            p.lr = detail::parse_num<double>(val, key);
        } else if (key == "batch") {
            p.batch = detail::parse_num<uint32_t>(val, key);
        } else if (key == "alpha") {
            p.alpha = detail::parse_num<double>(val, key);
        } else if (key == "data_samples") {
            p.data_samples = detail::parse_num<uint32_t>(val, key);
        } else if (key == "deterministic_timing") {
            p.deterministic_timing = detail::parse_bool(val, key);
        } else {
            throw ConfigError("unknown key: " + key);
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_kv(parse_kv_text(ss.str()));
}

}  // namespace zkfl

#endif  // ZKFL_CONFIG_HPP
