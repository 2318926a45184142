// Command-line front end: design | analyze | simulate, config-driven,
// emitting CSV/JSON with provenance metadata.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "stabcode/experiment.hpp"

namespace {

using namespace stabcode;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::int64_t seed = -1;
    int threads = 0;
};

ExperimentConfig load(const CommonOpts& opts) {
    ExperimentConfig cfg = ExperimentConfig::from_file(opts.config_path);
    if (opts.seed >= 0) cfg.override_seeds(static_cast<std::uint64_t>(opts.seed));
    if (!opts.out_path.empty()) cfg.output_path = opts.out_path;
    return cfg;
}

void emit_table(const CsvTable& table, const std::string& path, const std::string& format) {
    if (format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : table.rows) {
            nlohmann::json o;
            for (std::size_t i = 0; i < table.header.size(); ++i) o[table.header[i]] = r[i];
            rows.push_back(std::move(o));
        }
        nlohmann::json j{{"metadata", table.metadata}, {"rows", rows}};
        if (path.empty()) {
            std::cout << j.dump(2) << "\n";
        } else {
            std::ofstream os(path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot open for writing: " + path);
            os << j.dump(2) << "\n";
        }
        return;
    }
    if (path.empty()) {
        write_csv(std::cout, table);
    } else {
        write_csv_file(path, table);
    }
}

int cmd_analyze(const CommonOpts& opts) {
    const ExperimentConfig cfg = load(opts);
    const AnalysisResult res = run_analyze(cfg);
    if (!res.unstable_paths.empty()) {
        std::cerr << "closed loop not internally stable; unstable paths:";
        for (const auto& p : res.unstable_paths) std::cerr << " " << p;
        std::cerr << "\n";
        return kExitInfeasible;
    }
    if (opts.format == "json") {
        std::cout << res.to_json().dump(2) << "\n";
        return kExitOk;
    }
    std::printf("|S-1|^2                 : %.6g\n", res.s_minus_one_norm_sq);
    std::printf("min stabilizing SNR     : %.6g\n", res.min_snr);
    std::printf("min coding rate         : %.6g bits\n", res.min_rate_bits);
    std::printf("achieved gamma          : %.6g (%.4g dB)\n", res.achieved_gamma,
                to_db(res.achieved_gamma));
    std::printf("predicted sigma_e^2     : %.6g\n", res.predicted_sigma_e_sq);
    std::printf("sigma_q^2               : %.6g\n", res.sigma_q_sq);
    std::printf("min sum-rate (k=%d,k'=%d): %.6g bits\n", cfg.design_k, cfg.design_k_prime,
                res.min_sum_rate_bound_bits);
    std::printf("efficiency at min rate  : %.6g\n", res.efficiency_at_min_sum_rate);
    return kExitOk;
}

int cmd_design(const CommonOpts& opts) {
    const ExperimentConfig cfg = load(opts);
    const DesignResult res = run_design(cfg);
    std::cout << res.plan.dump(2) << "\n";
    emit_table(res.ladder_sweep, cfg.output_path, opts.format);
    return kExitOk;
}

int cmd_simulate(const CommonOpts& opts) {
    const ExperimentConfig cfg = load(opts);
    const SimulateResult res = run_simulate(cfg, opts.threads);
    emit_table(res.table, cfg.output_path, opts.format);
    if (!res.summary.empty()) std::cout << res.summary;
    if (res.failed_rows == res.total_rows && res.total_rows > 0) return kExitAllRowsFailed;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"(k,k') stabilizing erasure-code designer and simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", opts.out_path, "output path (overrides config)");
        sub->add_option("--seed", opts.seed, "override all config seeds");
        sub->add_option("--format", opts.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", opts.threads, "sweep worker threads (0 = auto)");
    };
    CLI::App* design = app.add_subcommand("design", "plan a (k,k') code and sweep the SNR ladder");
    CLI::App* analyze = app.add_subcommand("analyze", "closed-form analysis of the configured loop");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo loss sweep of the configured schemes");
    add_common(design);
    add_common(analyze);
    add_common(simulate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(design)) return cmd_design(opts);
        if (app.got_subcommand(analyze)) return cmd_analyze(opts);
        if (app.got_subcommand(simulate)) return cmd_simulate(opts);
    } catch (const stabcode::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return stabcode::kExitValidationError;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "invalid input: " << ex.what() << "\n";
        return stabcode::kExitValidationError;
    } catch (const std::domain_error& ex) {
        std::cerr << "infeasible design: " << ex.what() << "\n";
        return stabcode::kExitInfeasible;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return stabcode::kExitOk;
}
