// Command-line front end: synthetic data emission, experiment runs, alpha
// sweeps, and stochastic-order diagnostics on score files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itecp/bench.hpp"
#include "itecp/csv.hpp"
#include "itecp/errors.hpp"
#include "itecp/stochord.hpp"

namespace {

std::vector<double> read_score_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw itecp::DataError("cannot open score file '" + path + "'");
    std::vector<double> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            std::size_t pos = 0;
            const double v = std::stod(line, &pos);
            if (pos != line.size()) throw std::invalid_argument(line);
            out.push_back(v);
        } catch (const std::exception&) {
            if (first && (line == "score" || line == "scores")) {
                first = false;
                continue;  // header row
            }
            throw itecp::DataError("score file '" + path + "': cannot parse line '" +
                                   line + "'");
        }
        first = false;
    }
    if (out.empty()) throw itecp::DataError("score file '" + path + "' has no values");
    return out;
}

void print_summaries(const itecp::RunResult& res) {
    std::printf("alpha = %g\n", res.alpha);
    std::printf("%-12s %10s %10s %10s %10s %8s\n", "method", "coverage", "avg_len",
                "rmse", "vacuous", "reps");
    for (const auto& s : itecp::summarize(res)) {
        std::printf("%-12s %10.4f %10.4f %10.4f %10zu %8zu\n",
                    itecp::method_name(s.method), s.coverage, s.avg_len, s.rmse,
                    s.vacuous, s.reps_ok);
    }
    for (std::size_t m = 0; m < res.methods.size(); ++m) {
        for (std::size_t r = 0; r < res.cells[m].size(); ++r) {
            if (!res.cells[m][r].ok)
                std::fprintf(stderr, "warning: %s replication %zu failed: %s\n",
                             itecp::method_name(res.methods[m]), r,
                             res.cells[m][r].error.c_str());
        }
    }
}

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<double> alpha;
};

void apply_overrides(itecp::ExperimentConfig& cfg, const CommonFlags& flags) {
    if (flags.seed) cfg.master_seed = *flags.seed;
    if (flags.out) cfg.out_dir = *flags.out;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    if (flags.alpha) cfg.alphas = {*flags.alpha};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conformal meta-learner benchmark for treatment-effect intervals"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset CSV");
    itecp::SynthConfig synth;
    std::string sim_setup = "B";
    std::string sim_out = "dataset.csv";
    sim->add_option("--n", synth.n, "sample count");
    sim->add_option("--d", synth.d, "covariate dimension");
    sim->add_option("--setup", sim_setup, "A, B or custom");
    sim->add_option("--gamma", synth.gamma, "effect parameter for custom setup");
    sim->add_option("--seed", synth.seed, "RNG seed");
    sim->add_option("--out", sim_out, "output CSV path");

    // run / sweep
    CommonFlags flags;
    std::string config_path;
    auto add_run_flags = [&](CLI::App* cmd, bool with_alpha) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { flags.seed = v; }, "master seed override");
        cmd->add_option_function<std::string>(
            "--out", [&](std::string v) { flags.out = std::move(v); },
            "output directory override");
        cmd->add_option_function<int>(
            "--jobs", [&](int v) { flags.jobs = v; }, "worker thread count");
        if (with_alpha)
            cmd->add_option_function<double>(
                "--alpha", [&](double v) { flags.alpha = v; },
                "single target miscoverage override");
    };
    auto* run = app.add_subcommand("run", "run the experiment described by a config");
    add_run_flags(run, true);
    auto* sweep = app.add_subcommand("sweep", "run the experiment over an alpha grid");
    add_run_flags(sweep, false);

    // diagnose
    auto* diag = app.add_subcommand(
        "diagnose", "stochastic-order report from two score CSV files");
    std::string pseudo_path, oracle_path, diag_out;
    diag->add_option("pseudo", pseudo_path, "pseudo-outcome score file")->required();
    diag->add_option("oracle", oracle_path, "oracle score file")->required();
    diag->add_option("--out", diag_out, "directory for the merged ECDF CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            if (sim_setup == "A" || sim_setup == "a") synth.setup = itecp::Setup::A;
            else if (sim_setup == "B" || sim_setup == "b") synth.setup = itecp::Setup::B;
            else if (sim_setup == "custom") synth.setup = itecp::Setup::CustomGamma;
            else throw itecp::ConfigError("simulate: setup must be A, B or custom");
            const auto ds = itecp::generate_synthetic(synth);
            itecp::save_csv(ds, sim_out);
            std::printf("wrote %zu rows, %zu covariates to %s\n", ds.n(), ds.d(),
                        sim_out.c_str());
        } else if (run->parsed() || sweep->parsed()) {
            auto cfg = itecp::parse_config_file(config_path);
            apply_overrides(cfg, flags);
            if (sweep->parsed() && cfg.alphas.size() < 2)
                cfg.alphas = {0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
            const auto results = itecp::run_sweep(cfg);
            itecp::emit_reports(results, cfg.out_dir);
            for (const auto& res : results) print_summaries(res);
            std::printf("reports written to %s\n", cfg.out_dir.c_str());
        } else if (diag->parsed()) {
            const auto pseudo = read_score_file(pseudo_path);
            const auto oracle = read_score_file(oracle_path);
            const auto rep = itecp::order_report(pseudo, oracle);
            std::printf("n_pseudo=%zu n_oracle=%zu\n", pseudo.size(), oracle.size());
            std::printf("fosd pseudo over oracle: %s (max CDF gap %.6g)\n",
                        rep.fosd_fg ? "yes" : "no", rep.fosd_margin);
            std::printf("fosd oracle over pseudo: %s\n", rep.fosd_gf ? "yes" : "no");
            std::printf("sosd pseudo over oracle: %s (min integrated gap %.6g)\n",
                        rep.sosd_fg ? "yes" : "no", rep.sosd_min_gap);
            std::printf("mcx  pseudo over oracle: %s (min stop-loss gap %.6g)\n",
                        rep.mcx_fg ? "yes" : "no", rep.mcx_min_gap);
            if (rep.alpha_star)
                std::printf("alpha_star = %.6g%s\n", *rep.alpha_star,
                            rep.v_star ? (" (v_star = " + std::to_string(*rep.v_star) + ")").c_str()
                                       : "");
            else
                std::printf("alpha_star: none (inverted dominance)\n");
            if (!diag_out.empty()) {
                std::filesystem::create_directories(diag_out);
                const auto avg = itecp::averaged_ecdf({pseudo}, {oracle});
                std::ofstream f(std::filesystem::path(diag_out) / "ecdf_diagnose.csv");
                if (!f) throw itecp::DataError("cannot write ecdf_diagnose.csv");
                f << "t,F_pseudo,F_oracle\n";
                for (std::size_t j = 0; j < avg.grid.size(); ++j) {
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", avg.grid[j],
                                  avg.f_pseudo[j], avg.f_oracle[j]);
                    f << buf;
                }
            }
        }
    } catch (const itecp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const itecp::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
