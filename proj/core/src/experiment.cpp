#include "stabcode/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace stabcode {

std::string toolkit_version() { return "stabcode 0.1.0"; }

namespace {

ZeroReceptionPolicy policy_from_string(const std::string& s) {
    if (s == "zero" || s == "zero_fill") return ZeroReceptionPolicy::ZeroFill;
    if (s == "hold" || s == "hold_previous") return ZeroReceptionPolicy::HoldPrevious;
    throw ConfigError("unknown zero_reception_policy: " + s);
}

CodeFamily family_of(CoderKind kind) {
    return kind == CoderKind::MultipleDescriptions ? CodeFamily::MultipleDescriptions
                                                   : CodeFamily::IndependentEncodings;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig cfg;
        cfg.plant = j.at("plant").get<PlantModel>();
        if (j.contains("synthesis")) {
            const auto& s = j.at("synthesis");
            cfg.synthesis.gamma_target = s.at("gamma_target").get<double>();
            cfg.synthesis.fir_order = s.value("fir_order", cfg.synthesis.fir_order);
            cfg.synthesis.truncation_horizon =
                s.value("truncation_horizon", cfg.synthesis.truncation_horizon);
            cfg.synthesis.bisection_tolerance =
                s.value("bisection_tolerance", cfg.synthesis.bisection_tolerance);
            cfg.synthesis.max_iterations = s.value("max_iterations", cfg.synthesis.max_iterations);
        } else {
            throw ConfigError("missing synthesis section");
        }
        if (j.contains("design")) {
            const auto& d = j.at("design");
            cfg.design_k = d.value("k", cfg.design_k);
            cfg.design_k_prime = d.value("k_prime", cfg.design_k_prime);
            cfg.design_family =
                code_family_from_string(d.value("family", std::string("independent")));
            cfg.design_rho = d.value("rho", 0.0);
            if (d.contains("sweep_db")) {
                cfg.sweep_min_db = d.at("sweep_db").value("min", cfg.sweep_min_db);
                cfg.sweep_max_db = d.at("sweep_db").value("max", cfg.sweep_max_db);
                cfg.sweep_points = d.at("sweep_db").value("points", cfg.sweep_points);
            }
        }
        for (const auto& js : j.value("schemes", nlohmann::json::array())) {
            SchemeSpec s;
            s.name = js.at("name").get<std::string>();
            s.coder = coder_kind_from_string(js.at("coder").get<std::string>());
            s.k = js.value("k", 1);
            s.k_prime = js.value("k_prime", 1);
            s.rho = js.value("rho", 0.0);
            s.nesting = js.value("nesting_factor", 5);
            s.awgn_sigma_q_sq = js.value("sigma_q_sq", 0.0);
            if (js.contains("calibration")) {
                const auto& c = js.at("calibration");
                s.calibration.mode = c.value("mode", std::string("ladder"));
                s.calibration.single_snr_target = c.value("single_snr_target", 0.0);
                s.calibration.step = c.value("step", 0.0);
                s.calibration.of = c.value("of", std::string());
            }
            cfg.schemes.push_back(std::move(s));
        }
        if (j.contains("channel")) {
            const auto& c = j.at("channel");
            cfg.loss_grid = c.value("loss_grid", cfg.loss_grid);
            cfg.channel_seed = c.value("seed", cfg.channel_seed);
        }
        if (j.contains("sim")) {
            const auto& s = j.at("sim");
            cfg.horizon = s.value("horizon", cfg.horizon);
            cfg.burn_in = s.value("burn_in", cfg.burn_in);
            cfg.disturbance_seed = s.value("disturbance_seed", cfg.disturbance_seed);
            cfg.dither_seed = s.value("dither_seed", cfg.dither_seed);
            cfg.divergence_threshold = s.value("divergence_threshold", cfg.divergence_threshold);
            cfg.zero_policy = policy_from_string(s.value("zero_reception_policy", std::string("zero")));
            if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
        }
        if (j.contains("output")) cfg.output_path = j.at("output").value("path", std::string());
        for (double p : cfg.loss_grid)
            if (p < 0.0 || p > 1.0) throw ConfigError("loss probabilities must lie in [0,1]");
        cfg.config_hash = hash_hex(fnv1a64(j.dump()));
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("invalid config: ") + ex.what());
    }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    return from_json(j);
}

void ExperimentConfig::override_seeds(std::uint64_t base) {
    disturbance_seed = base;
    dither_seed = base + 1;
    channel_seed = base + 2;
}

nlohmann::json AnalysisResult::to_json() const {
    return nlohmann::json{{"s_minus_one_norm_sq", s_minus_one_norm_sq},
                          {"min_snr", min_snr},
                          {"min_rate_bits", min_rate_bits},
                          {"achieved_gamma", achieved_gamma},
                          {"predicted_sigma_e_sq", predicted_sigma_e_sq},
                          {"sigma_q_sq", sigma_q_sq},
                          {"min_sum_rate_bound_bits", min_sum_rate_bound_bits},
                          {"efficiency_at_min_sum_rate", efficiency_at_min_sum_rate},
                          {"unstable_paths", unstable_paths}};
}

AnalysisResult run_analyze(const ExperimentConfig& cfg) {
    AnalysisResult res;
    res.min_snr = min_snr_for_stability(cfg.plant);
    res.min_rate_bits = 0.5 * std::log2(1.0 + res.min_snr);

    const SynthesisReport report = synthesize_filters(cfg.plant, cfg.synthesis);
    const StabilityReport stab = verify_internal_stability(cfg.plant, report.filters);
    res.unstable_paths = stab.unstable_paths;

    const ClosedLoopMaps maps = closed_loop_maps(cfg.plant, report.filters);
    res.s_minus_one_norm_sq =
        h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    res.achieved_gamma = report.achieved_gamma;
    res.predicted_sigma_e_sq = report.achieved_sigma_e_sq;
    res.sigma_q_sq = report.sigma_q_sq;
    res.min_sum_rate_bound_bits =
        sum_rate_lower_bound_indep(cfg.design_k, cfg.design_k_prime, res.s_minus_one_norm_sq);
    res.efficiency_at_min_sum_rate =
        efficiency_min_sum_rate(cfg.design_k, cfg.design_k_prime, res.s_minus_one_norm_sq);
    return res;
}

DesignResult run_design(const ExperimentConfig& cfg) {
    const SynthesisReport report = synthesize_filters(cfg.plant, cfg.synthesis);
    const ClosedLoopMaps maps = closed_loop_maps(cfg.plant, report.filters);
    const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());

    DesignResult out;
    const CodePlan plan =
        plan_code(cfg.plant, report.filters, cfg.synthesis.gamma_target, cfg.design_k,
                  cfg.design_k_prime, cfg.design_family, cfg.design_rho);
    nlohmann::json plan_json;
    to_json(plan_json, plan);
    plan_json["filters"] = report.filters;
    out.plan = plan_json;
    out.feasibility_threshold =
        feasibility_threshold_gamma(cfg.design_k, cfg.design_k_prime, cfg.design_rho, s1);

    CsvTable t;
    t.metadata.push_back("tool: " + toolkit_version());
    t.metadata.push_back("config_hash: " + cfg.config_hash);
    t.metadata.push_back("kind: design_sweep");
    {
        std::ostringstream os;
        os << "feasibility_threshold_gamma: " << format_cell(out.feasibility_threshold) << " ("
           << format_cell(to_db(out.feasibility_threshold)) << " dB)";
        t.metadata.push_back(os.str());
    }
    t.header = {"gamma_db", "ell", "snr_db", "eta", "family", "feasible"};
    for (int i = 0; i < cfg.sweep_points; ++i) {
        const double gdb = cfg.sweep_min_db +
                           (cfg.sweep_max_db - cfg.sweep_min_db) *
                               (cfg.sweep_points > 1 ? static_cast<double>(i) / (cfg.sweep_points - 1) : 0.0);
        const double gamma = from_db(gdb);
        if (gamma <= s1) continue;  // no operating point below the SNR floor
        const bool feasible =
            ladder_snr(cfg.design_k_prime, cfg.design_k, gamma, cfg.design_rho) >= s1;
        const double g1 = ladder_snr(1, cfg.design_k, gamma, cfg.design_rho);
        const double eta = efficiency(cfg.design_k, g1, gamma);
        for (int ell = 1; ell <= cfg.design_k; ++ell) {
            const double snr = ladder_snr(ell, cfg.design_k, gamma, cfg.design_rho);
            t.rows.push_back({format_cell(gdb), std::to_string(ell), format_cell(to_db(snr)),
                              format_cell(eta), to_string(cfg.design_family),
                              feasible ? "1" : "0"});
        }
    }
    out.ladder_sweep = std::move(t);
    return out;
}

std::vector<SimConfig> build_sim_configs(const ExperimentConfig& cfg,
                                         const SynthesisReport& synthesis) {
    const ClosedLoopMaps maps = closed_loop_maps(cfg.plant, synthesis.filters);
    const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    const double m_norm = h2_norm_sq(maps.l_y_p21_s);
    const double gamma = cfg.synthesis.gamma_target;

    std::vector<SimConfig> sims;
    std::vector<double> steps(cfg.schemes.size(), 0.0);

    for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
        const SchemeSpec& s = cfg.schemes[i];
        SimConfig sim;
        sim.plant = cfg.plant;
        sim.filters = synthesis.filters;
        sim.coder = s.coder;
        sim.code.k = s.k;
        sim.code.k_prime = s.k_prime;
        sim.code.rho = s.rho;
        sim.code.family = family_of(s.coder);
        sim.channel = ErasureChannel{0.0, cfg.channel_seed};
        sim.horizon = cfg.horizon;
        sim.burn_in = cfg.burn_in;
        sim.disturbance_seed = cfg.disturbance_seed;
        sim.dither_seed = cfg.dither_seed;
        sim.divergence_threshold = cfg.divergence_threshold;
        sim.zero_policy = cfg.zero_policy;

        const CalibrationSpec& cal = s.calibration;
        double step = 0.0;
        switch (s.coder) {
            case CoderKind::AdditiveGaussian: {
                sim.awgn_sigma_q_sq =
                    s.awgn_sigma_q_sq > 0.0 ? s.awgn_sigma_q_sq : synthesis.sigma_q_sq;
                break;
            }
            case CoderKind::MultipleDescriptions: {
                sim.assignment = build_index_assignment(s.nesting, s.k, 1.0, cfg.dither_seed);
                double target1;
                if (cal.mode == "single_snr") {
                    target1 = cal.single_snr_target;
                } else if (cal.mode == "step") {
                    sim.assignment.central_step = cal.step;
                    break;
                } else {
                    target1 = ladder_snr(1, s.k, gamma, s.rho);
                }
                sim.assignment.central_step =
                    calibrate_central_step(sim.assignment, m_norm, s1, target1);
                break;
            }
            case CoderKind::Independent:
            case CoderKind::Repetition: {
                if (cal.mode == "step") {
                    step = cal.step;
                } else if (cal.mode == "match_step") {
                    auto it = std::find_if(cfg.schemes.begin(), cfg.schemes.end(),
                                           [&](const SchemeSpec& o) { return o.name == cal.of; });
                    if (it == cfg.schemes.end() ||
                        static_cast<std::size_t>(it - cfg.schemes.begin()) >= i)
                        throw ConfigError("match_step must reference an earlier scheme: " + cal.of);
                    step = steps[static_cast<std::size_t>(it - cfg.schemes.begin())];
                } else if (cal.mode == "single_snr") {
                    // Zero-loss loop fixed point: the loop runs on the averaged
                    // noise (sigma^2/k for independent encodings, sigma^2 for
                    // repetition), and the single-description SNR then is
                    // sigma_v^2 / sigma^2.
                    const double divisor = s.coder == CoderKind::Independent ? s.k : 1;
                    const double denom = cal.single_snr_target - s1 / divisor;
                    if (denom <= 0.0)
                        throw std::domain_error("single-description SNR target unattainable");
                    step = std::sqrt(12.0 * m_norm / denom);
                } else {  // ladder
                    const CodePlan plan = plan_code(cfg.plant, synthesis.filters, gamma, s.k,
                                                    s.k_prime, family_of(s.coder), s.rho);
                    step = plan.quantizer_step;
                }
                sim.quantizer_step = step;
                break;
            }
        }
        steps[i] = step;
        sims.push_back(std::move(sim));
    }
    return sims;
}

SimulateResult run_simulate(const ExperimentConfig& cfg, int threads) {
    if (cfg.schemes.empty()) throw ConfigError("simulate requires at least one scheme");
    const SynthesisReport synthesis = synthesize_filters(cfg.plant, cfg.synthesis);
    const std::vector<SimConfig> sims = build_sim_configs(cfg, synthesis);
    const std::vector<SweepRow> rows = run_sweep(sims, cfg.loss_grid, threads);

    SimulateResult out;
    CsvTable& t = out.table;
    t.metadata.push_back("tool: " + toolkit_version());
    t.metadata.push_back("config_hash: " + cfg.config_hash);
    t.metadata.push_back("kind: simulation_sweep");
    {
        std::ostringstream os;
        os << "seeds: disturbance=" << cfg.disturbance_seed << " dither=" << cfg.dither_seed
           << " channel=" << cfg.channel_seed;
        t.metadata.push_back(os.str());
    }
    t.header = {"scheme",      "family",        "k",           "k_prime",
                "loss_prob",   "sigma_e_sq_db", "snr_all_db",  "entropy_bits",
                "sum_rate_bits", "diverged"};
    for (const auto& row : rows) {
        const SchemeSpec& s = cfg.schemes[row.scheme_index];
        if (row.failed) {
            ++out.failed_rows;
            t.rows.push_back({s.name, to_string(s.coder), std::to_string(s.k),
                              std::to_string(s.k_prime), format_cell(row.loss_probability), "nan",
                              "nan", "nan", "nan", "error"});
            continue;
        }
        const SimMetrics& m = row.metrics;
        t.rows.push_back({s.name, to_string(s.coder), std::to_string(s.k),
                          std::to_string(s.k_prime), format_cell(row.loss_probability),
                          format_cell(m.diverged ? std::numeric_limits<double>::infinity()
                                                 : to_db(m.sigma_e_sq_hat)),
                          format_cell(m.snr_all > 0.0 ? to_db(m.snr_all) : 0.0),
                          format_cell(m.entropy_per_description), format_cell(m.sum_rate_hat),
                          m.diverged ? "1" : "0"});
    }
    out.total_rows = rows.size();

    // gap summary against the repetition baseline, when present
    std::ostringstream summary;
    std::optional<std::size_t> rep_index;
    for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
        if (cfg.schemes[i].coder == CoderKind::Repetition) rep_index = i;
    if (rep_index) {
        summary << "gap vs " << cfg.schemes[*rep_index].name << " (dB, positive = better):\n";
        for (std::size_t pi = 0; pi < cfg.loss_grid.size(); ++pi) {
            const auto& rep_row = rows[*rep_index * cfg.loss_grid.size() + pi];
            summary << "  p=" << format_cell(cfg.loss_grid[pi]) << ":";
            for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
                if (si == *rep_index) continue;
                const auto& row = rows[si * cfg.loss_grid.size() + pi];
                double gap = std::numeric_limits<double>::quiet_NaN();
                if (!row.failed && !rep_row.failed && !row.metrics.diverged &&
                    !rep_row.metrics.diverged)
                    gap = to_db(rep_row.metrics.sigma_e_sq_hat) - to_db(row.metrics.sigma_e_sq_hat);
                summary << " " << cfg.schemes[si].name << "=" << format_cell(gap);
            }
            summary << "\n";
        }
    }
    out.summary = summary.str();
    return out;
}

}  // namespace stabcode
