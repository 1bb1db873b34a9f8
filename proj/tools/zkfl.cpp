/**
 * @file zkfl.cpp
 * @brief Command-line experiment runner.
 *
 * Subcommands: run, ablate-malicious, ablate-threshold, he-error, selftest,
 * bench. Exit codes: 0 = all assertions passed, 1 = assertion failure,
 * 2 = config error.
 * @license Apache-2.0
 */

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "zkfl/harness.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::string mode;
    int64_t seed = -1;
};

zkfl::RunConfig resolve_config(const GlobalOpts& g) {
    zkfl::RunConfig rc = g.config_path.empty() ? zkfl::RunConfig::defaults() : zkfl::load_config(g.config_path);
    if (g.seed >= 0) rc.proto.seed = static_cast<uint64_t>(g.seed);
    if (!g.mode.empty()) {
        if (g.mode == "all") {
            rc.modes = {zkfl::Mode::standard_fl, zkfl::Mode::fl_kem, zkfl::Mode::zkfl_pq};
        } else if (auto m = zkfl::mode_from_name(g.mode)) {
            rc.modes = {*m};
        } else {
            throw zkfl::ConfigError("unknown mode: " + g.mode);
        }
    }
    return rc;
}

void print_mode_summary(const zkfl::ModeSummary& m) {
    std::printf("%-12s final_acc=%.4f final_loss=%.4f mean_round=%.3fs mean_msg=%.1fKB", zkfl::mode_name(m.mode),
                m.final_accuracy, m.final_loss, m.mean_round_s, m.mean_msg_kb);
    if (m.detection_applicable())
        std::printf(" detection=%.0f%%", 100.0 * m.detection_rate());
    else
        std::printf(" detection=n/a");
    std::printf(" fpr=%.1f%%\n", 100.0 * m.fpr());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zkfl-pq federated-learning protocol simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "scenario config file (flat key=value)");
    app.add_option("--seed", g.seed, "override the experiment seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--mode", g.mode, "standard_fl | fl_kem | zkfl_pq | all");

    auto* run = app.add_subcommand("run", "run the configured modes; write rounds.csv and summary.json");
    auto* abl_m = app.add_subcommand("ablate-malicious", "sweep the number of malicious clients");
    std::vector<uint32_t> counts = {0, 1, 2, 3};
    abl_m->add_option("--counts", counts, "malicious-client counts to sweep");
    auto* abl_t = app.add_subcommand("ablate-threshold", "sweep the norm threshold tau");
    std::vector<double> taus = {1.0, 2.0, 5.0, 10.0, 50.0};
    abl_t->add_option("--taus", taus, "tau values to sweep");
    auto* he_err = app.add_subcommand("he-error", "HE reconstruction error vs the plaintext oracle");
    auto* selftest = app.add_subcommand("selftest", "run the module oracle suites");
    auto* bench = app.add_subcommand("bench", "wall-clock ordering assertions (not for CI)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest->parsed()) {
            zkfl::SelftestReport rep = zkfl::cmd_selftest(std::cout);
            return rep.all_passed() ? 0 : 1;
        }

        zkfl::RunConfig rc = resolve_config(g);

        if (run->parsed()) {
            zkfl::ExperimentSummary sum = zkfl::cmd_run(rc, g.out_dir);
            if (sum.degenerate) std::printf("degenerate run (rounds = 0)\n");
            for (const auto& m : sum.modes) print_mode_summary(m);
            if (!g.out_dir.empty()) std::printf("wrote %s/rounds.csv and summary.json\n", g.out_dir.c_str());
            return 0;
        }
        if (abl_m->parsed()) {
            auto rows = zkfl::cmd_ablate_malicious(counts, rc, g.out_dir);
            std::printf("%-10s %-14s %-15s %-8s %s\n", "malicious", "final_accuracy", "detection_rate", "fpr",
                        "false_positives");
            for (const auto& r : rows)
                std::printf("%-10.0f %-14.4f %-15s %-8.3f %llu\n", r.x, r.final_accuracy,
                            r.detection_rate < 0 ? "n/a" : std::to_string(r.detection_rate).c_str(), r.fpr,
                            static_cast<unsigned long long>(r.false_positives));
            return 0;
        }
        if (abl_t->parsed()) {
            auto rows = zkfl::cmd_ablate_threshold(taus, rc, g.out_dir);
            std::printf("%-8s %-14s %-15s %-8s %s\n", "tau", "final_accuracy", "detection_rate", "fpr",
                        "false_positives");
            for (const auto& r : rows)
                std::printf("%-8.2f %-14.4f %-15s %-8.3f %llu\n", r.x, r.final_accuracy,
                            r.detection_rate < 0 ? "n/a" : std::to_string(r.detection_rate).c_str(), r.fpr,
                            static_cast<unsigned long long>(r.false_positives));
            return 0;
        }
        if (he_err->parsed()) {
            zkfl::HeErrorReport rep = zkfl::cmd_he_error(rc, g.out_dir);
            std::printf("round  he_mae        he_rel_err\n");
            for (size_t i = 0; i < rep.mae_per_round.size(); ++i)
                std::printf("%-6zu %-13.6g %-13.6g\n", i + 1, rep.mae_per_round[i], rep.rel_err_per_round[i]);
            std::printf("mean_mae=%.6g early_rel=%.4f late_rel=%.4f\n", rep.mean_mae, rep.early_rel, rep.late_rel);
            return 0;
        }
        if (bench->parsed()) {
            zkfl::BenchReport rep = zkfl::cmd_bench(rc, std::cout);
            return rep.ordering_round_time && rep.ordering_zkp_share ? 0 : 1;
        }
    } catch (const zkfl::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
