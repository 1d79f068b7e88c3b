// Command-line front end: scenario configuration, simulation runs, CSV and
// JSON emission.  All physical inputs are dimensionless, scaled by the pulse
// duration T (gamma_T = gamma*T and so on); T is the internal time unit.
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible schedule,
// 4 numeric-convergence failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qmem/classical.hpp"
#include "qmem/csv.hpp"
#include "qmem/cycle.hpp"
#include "qmem/errors.hpp"
#include "qmem/fullmodel.hpp"
#include "qmem/numerics.hpp"
#include "qmem/scenario.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qmem;

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

const std::map<std::string, std::map<std::string, std::string>> kPresets = {
    {"fig4",
     {{"gamma_T", "4"}, {"gn_T", "40"}, {"gamma_a_T", "0"}, {"gamma_c_T", "0"},
      {"pulse", "sech"}, {"schedule", "analytic"}, {"grid_t0_T", "-10"},
      {"grid_t1_T", "10"}, {"grid_points", "8192"}, {"model", "reduced"}}},
    {"fig5",
     {{"gamma_T", "4"}, {"gn_T", "40"}, {"gamma_a_T", "0"}, {"gamma_c_T", "0"},
      {"pulse", "sech"}, {"schedule", "analytic"}, {"grid_t0_T", "-10"},
      {"grid_t1_T", "10"}, {"grid_points", "8192"}, {"hold_T", "10"}}},
    {"fig3",
     {{"gamma_eff_T_list", "0.1,1,10"}, {"pulse", "sech"}, {"grid_t0_T", "-10"},
      {"grid_t1_T", "40"}, {"grid_points", "8192"}}},
};

// Binds scenario keys to CLI options so that a flat key = value config file
// and explicit flags share one name space.  Priority: defaults < preset <
// config file < command line; QMEM_OUT_DIR overrides the output directory.
class OptionSet {
public:
    OptionSet(CLI::App* cmd, ScenarioConfig& cfg) : cmd_(cmd), cfg_(&cfg) {
        cmd->add_option("--config", config_path_, "flat key = value configuration file");
        cmd->add_option("--preset", preset_, "named scenario preset")
            ->check(CLI::IsMember({"fig3", "fig4", "fig5"}));
        bind_string("out_dir", cfg.out_dir, "output directory");
    }

    void bind_double(const std::string& key, double& field, const std::string& desc) {
        auto* opt = cmd_->add_option("--" + key, field, desc);
        setters_[key] = {opt, [&field, key](const std::string& s) {
                             field = parse_number(key, s);
                         }};
    }

    void bind_int(const std::string& key, int& field, const std::string& desc) {
        auto* opt = cmd_->add_option("--" + key, field, desc);
        setters_[key] = {opt, [&field, key](const std::string& s) {
                             field = static_cast<int>(std::lround(parse_number(key, s)));
                         }};
    }

    void bind_string(const std::string& key, std::string& field, const std::string& desc) {
        auto* opt = cmd_->add_option("--" + key, field, desc);
        setters_[key] = {opt, [&field](const std::string& s) { field = s; }};
    }

    void bind_standard_physics() {
        bind_double("gamma_T", cfg_->gamma_T, "empty-cavity decay rate, units 1/T");
        bind_double("gn_T", cfg_->gn_T, "collective coupling g sqrt(N), units 1/T");
        bind_double("gamma_a_T", cfg_->gamma_a_T, "excited-state decay rate, units 1/T");
        bind_double("gamma_c_T", cfg_->gamma_c_T, "spin-coherence decay rate, units 1/T");
        bind_int("n_atoms", cfg_->n_atoms, "atom count N");
    }

    void bind_standard_scenario() {
        bind_string("pulse", cfg_->pulse, "sech | gaussian | hyper_gaussian | csv:<path>");
        bind_double("delay_T", cfg_->delay_T, "pulse arrival delay, units T");
        bind_string("schedule", cfg_->schedule,
                    "analytic | solved | constant:<v> | file:<path>");
        bind_double("grid_t0_T", cfg_->grid_t0_T, "grid start, units T");
        bind_double("grid_t1_T", cfg_->grid_t1_T, "grid end, units T");
        bind_int("grid_points", cfg_->grid_points, "number of grid points");
        bind_double("omega_cap_over_gn", cfg_->omega_cap_over_gn,
                    "drive cap in units of g sqrt(N)");
    }

    void bind_bank() {
        bind_int("n_modes", cfg_->n_modes, "free-field modes in the bank");
        bind_double("bank_delta_max_T", cfg_->bank_delta_max_T,
                    "mode-bank half bandwidth, units 1/T (0 = auto)");
    }

    // Resolves preset and config-file values for keys not set on the command
    // line, then applies the environment override for the output directory.
    void finalize() {
        std::map<std::string, std::string> config_values;
        if (!config_path_.empty()) config_values = read_config_file(config_path_);

        const std::map<std::string, std::string>* preset_values = nullptr;
        if (!preset_.empty()) preset_values = &kPresets.at(preset_);

        for (auto& [key, binding] : setters_) {
            if (binding.opt->count() > 0) continue;
            if (auto it = config_values.find(key); it != config_values.end()) {
                binding.set(it->second);
                config_values.erase(it);
            } else if (preset_values) {
                if (auto pit = preset_values->find(key); pit != preset_values->end())
                    binding.set(pit->second);
            }
        }
        // Anything left in the config map refers to keys this command does
        // not understand.
        for (const auto& [key, value] : config_values) {
            bool cli_set = setters_.count(key) > 0;
            if (!cli_set)
                throw std::invalid_argument("config: unknown key '" + key + "'");
        }

        if (const char* env = std::getenv("QMEM_OUT_DIR"); env && *env)
            cfg_->out_dir = env;
    }

private:
    struct Binding {
        CLI::Option* opt;
        std::function<void(const std::string&)> set;
    };

    static double parse_number(const std::string& key, const std::string& s) {
        try {
            size_t used = 0;
            const double v = std::stod(s, &used);
            while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
            if (used != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad numeric value for '" + key + "': " + s);
        }
    }

    static std::map<std::string, std::string> read_config_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("config: cannot open " + path);
        std::map<std::string, std::string> values;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t");
                const auto b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) continue;
            values[key] = value;
        }
        if (values.empty())
            throw std::invalid_argument("config: no key = value entries in " + path);
        return values;
    }

    CLI::App* cmd_;
    ScenarioConfig* cfg_;
    std::string config_path_;
    std::string preset_;
    std::map<std::string, Binding> setters_;
};

fs::path prepare_out_dir(const ScenarioConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_complex_columns(std::vector<csv::Column>& cols, const std::string& stem,
                           const std::vector<cplx>& values) {
    std::vector<double> re(values.size()), im(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        re[i] = values[i].real();
        im[i] = values[i].imag();
    }
    cols.push_back({stem + "_re", std::move(re)});
    cols.push_back({stem + "_im", std::move(im)});
}

void write_trajectory_csv(const fs::path& path, const ReducedTrajectory& traj) {
    std::vector<csv::Column> cols;
    cols.push_back({"t", traj.grid.times()});
    write_complex_columns(cols, "dark", traj.dark);
    cols.push_back({"population", traj.population});
    write_complex_columns(cols, "phi_out", traj.phi_out);
    csv::write(path.string(), cols);
}

double release_centroid(const TimeGrid& grid, const std::vector<cplx>& phi, double t_from) {
    double num_acc = 0.0, den_acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        if (t < t_from) continue;
        const double w = std::norm(phi[i]);
        num_acc += t * w;
        den_acc += w;
    }
    return den_acc > 0.0 ? num_acc / den_acc : t_from;
}

int run_load(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const SystemParams params = params_from_config(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const PulseEnvelope pulse = pulse_from_config(cfg, grid);
    const ControlSchedule schedule = schedule_from_config(cfg, params, pulse);
    if (!schedule.feasible())
        throw InfeasibleError("load: schedule infeasible: " + schedule.diagnostic());
    schedule.to_csv((out / "schedule.csv").string());

    Entries summary;
    summary.emplace_back("command", "load");
    summary.emplace_back("model", cfg.model);
    summary.emplace_back("feasible", "1");

    const bool run_reduced = cfg.model == "reduced" || cfg.model == "both";
    const bool run_full = cfg.model == "full" || cfg.model == "both";
    if (!run_reduced && !run_full)
        throw std::invalid_argument("load: model must be reduced, full or both");

    ReducedTrajectory reduced;
    if (run_reduced) {
        reduced = integrate_dark_state(params, pulse, schedule);
        write_trajectory_csv(out / "trajectory.csv", reduced);
        summary.emplace_back("final_population", format_double(reduced.population.back()));
        summary.emplace_back("final_dark_abs", format_double(reduced.final_dark_abs()));
        summary.emplace_back("reflected_energy", format_double(reflected_energy(reduced)));
        summary.emplace_back("ledger_max_residual",
                             format_double(reduced.ledger_max_residual));
        summary.emplace_back("warnings", std::to_string(reduced.warnings.size()));
    }

    if (run_full) {
        const ModeBank bank = bank_from_config(cfg, params);
        const auto xi0 = encode_input_modes(pulse, bank, grid.t_start());
        FullModelOptions opts;
        const FullTrajectory full = integrate_full(params, bank, xi0, schedule, opts);

        std::vector<csv::Column> cols;
        cols.push_back({"t", full.grid.times()});
        write_complex_columns(cols, "a", full.a);
        write_complex_columns(cols, "b", full.b);
        write_complex_columns(cols, "c", full.c);
        std::vector<double> pop(full.grid.size());
        for (int i = 0; i < full.grid.size(); ++i) pop[i] = std::norm(full.dark[i]);
        cols.push_back({"dark_population", pop});
        cols.push_back({"norm", full.norm});
        csv::write((out / "full_trajectory.csv").string(), cols);

        std::vector<csv::Column> mode_cols;
        mode_cols.push_back({"delta", bank.detunings});
        std::vector<double> init_abs2(bank.size());
        for (int k = 0; k < bank.size(); ++k) init_abs2[k] = std::norm(xi0[k]);
        mode_cols.push_back({"xi_initial_abs2", init_abs2});
        write_complex_columns(mode_cols, "xi_final", full.xi_final);
        std::vector<double> final_abs2(bank.size());
        for (int k = 0; k < bank.size(); ++k) final_abs2[k] = std::norm(full.xi_final[k]);
        mode_cols.push_back({"xi_final_abs2", final_abs2});
        csv::write((out / "modes.csv").string(), mode_cols);

        summary.emplace_back("final_population_full",
                             format_double(full.final_dark_population()));
        double norm_drift = 0.0;
        for (double n : full.norm) norm_drift = std::max(norm_drift, std::abs(n - full.norm[0]));
        summary.emplace_back("norm_drift", format_double(norm_drift));
        summary.emplace_back("drive_ratio_min_over_sqrtN",
                             format_double(full.drive_ratio_min));
        summary.emplace_back("step_check_error", format_double(full.step_check_error));
        if (run_reduced) {
            double dev = 0.0;
            for (int i = 0; i < grid.size(); ++i)
                dev = std::max(dev,
                               std::abs(std::norm(full.dark[i]) - reduced.population[i]));
            summary.emplace_back("max_population_deviation", format_double(dev));
        }
    }

    write_summary((out / "summary.txt").string(), summary);
    return 0;
}

int run_synthesize(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const SystemParams params = params_from_config(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const PulseEnvelope pulse = pulse_from_config(cfg, grid);
    const ControlSchedule schedule = schedule_from_config(cfg, params, pulse);
    schedule.to_csv((out / "schedule.csv").string());

    const AdiabaticityReport margins = check_adiabaticity(params, schedule, cfg.margin);
    Entries summary;
    summary.emplace_back("command", "synthesize");
    summary.emplace_back("feasible", schedule.feasible() ? "1" : "0");
    summary.emplace_back("diagnostic", schedule.diagnostic());
    summary.emplace_back("clamp_events", std::to_string(schedule.clamp_events()));
    summary.emplace_back("cap_events", std::to_string(schedule.cap_events()));
    summary.emplace_back("margin", format_double(margins.margin));
    summary.emplace_back("cavity_ratio", format_double(margins.cavity_ratio));
    summary.emplace_back("pulse_ratio", format_double(margins.pulse_ratio));
    summary.emplace_back("mixed_ratio", format_double(margins.mixed_ratio));
    summary.emplace_back("collective_ratio", format_double(margins.collective_ratio));
    summary.emplace_back("margins_pass", margins.pass ? "1" : "0");
    write_summary((out / "summary.txt").string(), summary);

    if (!schedule.feasible())
        throw InfeasibleError("synthesize: " + schedule.diagnostic());
    return 0;
}

int run_cycle_cmd(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const SystemParams params = params_from_config(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const PulseEnvelope pulse = pulse_from_config(cfg, grid);
    const ControlSchedule schedule = schedule_from_config(cfg, params, pulse);
    const CyclePlan plan = CyclePlan::time_reversed(params, schedule, cfg.hold_T);
    const CycleResult result = run_cycle(plan, pulse);

    std::vector<csv::Column> cols;
    cols.push_back({"t", result.grid.times()});
    write_complex_columns(cols, "phi_in", result.phi_in);
    write_complex_columns(cols, "phi_out", result.phi_out);
    cols.push_back({"population", result.population});
    csv::write((out / "envelopes.csv").string(), cols);

    const ReleaseEnvelope release =
        release_envelope(params, result.dark_at_release, plan.release_schedule);
    const double centroid =
        release_centroid(result.grid, result.phi_out, result.release_start);
    const double fit_residual =
        sech_fit_residual(release.grid, release.values, params.t_pulse(), centroid);

    json report;
    report["ledger"] = {{"reflected", result.ledger.reflected},
                        {"decayed", result.ledger.decayed},
                        {"released", result.ledger.released},
                        {"stored", result.ledger.stored},
                        {"closure_error", result.ledger.closure_error}};
    report["stored_initial"] = result.stored_initial;
    report["dark_at_release_abs"] = std::abs(result.dark_at_release);
    report["release_start"] = result.release_start;
    report["release_peak_time"] = result.release_peak_time;
    report["release_centroid"] = centroid;
    report["sech_fit_residual"] = fit_residual;
    report["hold_T"] = cfg.hold_T;
    std::ofstream(out / "cycle_report.json") << report.dump(2) << "\n";

    Entries summary;
    summary.emplace_back("command", "cycle");
    summary.emplace_back("stored_initial", format_double(result.stored_initial));
    summary.emplace_back("released", format_double(result.ledger.released));
    summary.emplace_back("reflected", format_double(result.ledger.reflected));
    summary.emplace_back("decayed", format_double(result.ledger.decayed));
    summary.emplace_back("stored_final", format_double(result.ledger.stored));
    summary.emplace_back("closure_error", format_double(result.ledger.closure_error));
    summary.emplace_back("release_peak_time", format_double(result.release_peak_time));
    summary.emplace_back("sech_fit_residual", format_double(fit_residual));
    write_summary((out / "summary.txt").string(), summary);
    return 0;
}

int run_fig3(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const std::vector<double> gamma_effs = parse_double_list(cfg.gamma_eff_T_list);

    Entries summary;
    summary.emplace_back("command", "fig3");
    std::vector<double> overlaps, tails;
    for (size_t k = 0; k < gamma_effs.size(); ++k) {
        ScenarioConfig local = cfg;
        local.gamma_T = gamma_effs[k];
        local.gamma_a_T = 0.0;
        local.gamma_c_T = 0.0;
        const SystemParams params = params_from_config(local);
        const PulseEnvelope pulse = pulse_from_config(local, grid);
        const ControlSchedule schedule = ControlSchedule::constant(params, grid, 1.0);
        const ReducedTrajectory traj = loading_output(params, pulse, schedule);

        std::vector<csv::Column> cols;
        cols.push_back({"t", traj.grid.times()});
        write_complex_columns(cols, "phi_in", std::vector<cplx>(pulse.values()));
        write_complex_columns(cols, "phi_out", traj.phi_out);
        csv::write((out / ("fig3_" + std::to_string(k) + ".csv")).string(), cols);

        const double overlap = reflected_overlap(pulse, traj);
        const double tail = output_tail_duration(traj, cfg.delay_T + 3.0);
        overlaps.push_back(overlap);
        tails.push_back(tail);
        summary.emplace_back("gamma_eff_T_" + std::to_string(k),
                             format_double(gamma_effs[k]));
        summary.emplace_back("overlap_" + std::to_string(k), format_double(overlap));
        summary.emplace_back("tail_" + std::to_string(k), format_double(tail));
    }

    bool overlap_monotone = true, tail_monotone = true;
    for (size_t k = 1; k < gamma_effs.size(); ++k) {
        if (gamma_effs[k] <= gamma_effs[k - 1])
            throw std::invalid_argument("fig3: gamma_eff_T_list must increase");
        if (overlaps[k] >= overlaps[k - 1]) overlap_monotone = false;
        if (tails[k] >= tails[k - 1]) tail_monotone = false;
    }
    summary.emplace_back("overlap_monotone", overlap_monotone ? "1" : "0");
    summary.emplace_back("tail_monotone", tail_monotone ? "1" : "0");
    write_summary((out / "summary.txt").string(), summary);
    return 0;
}

int run_sweep_timing(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const SystemParams params = params_from_config(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const PulseEnvelope pulse = pulse_from_config(cfg, grid);
    const ControlSchedule schedule = schedule_from_config(cfg, params, pulse);
    if (!schedule.feasible())
        throw InfeasibleError("sweep-timing: schedule infeasible: " + schedule.diagnostic());

    if (cfg.n_deltas < 2) throw std::invalid_argument("sweep-timing: n_deltas must be >= 2");
    std::vector<double> deltas(cfg.n_deltas);
    for (int k = 0; k < cfg.n_deltas; ++k)
        deltas[k] = cfg.delta_min_T *
                    std::pow(cfg.delta_max_T / cfg.delta_min_T,
                             static_cast<double>(k) / (cfg.n_deltas - 1));

    const std::vector<double> finals = timing_sensitivity(params, pulse, schedule, deltas);
    std::vector<double> losses(finals.size());
    for (size_t k = 0; k < finals.size(); ++k) losses[k] = 1.0 - finals[k];
    const double exponent = num::power_law_exponent(deltas, losses);

    csv::write((out / "timing.csv").string(),
               {{"delta_t", deltas}, {"dark_abs", finals}, {"loss", losses}});
    Entries summary;
    summary.emplace_back("command", "sweep-timing");
    summary.emplace_back("exponent", format_double(exponent));
    summary.emplace_back("loss_min", format_double(losses.front()));
    summary.emplace_back("loss_max", format_double(losses.back()));
    write_summary((out / "summary.txt").string(), summary);
    return 0;
}

int run_polarization(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const SystemParams params = params_from_config(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const PulseEnvelope pulse = pulse_from_config(cfg, grid);
    const ControlSchedule schedule = schedule_from_config(cfg, params, pulse);
    const CyclePlan plan = CyclePlan::time_reversed(params, schedule, cfg.hold_T);
    const PolarizationState qubit{cplx(cfg.alpha_re, cfg.alpha_im),
                                  cplx(cfg.beta_re, cfg.beta_im)};

    const PolarizationCycleResult result = run_polarization_cycle(plan, pulse, qubit);

    json report;
    report["input"] = {{"alpha_re", qubit.alpha.real()},
                       {"alpha_im", qubit.alpha.imag()},
                       {"beta_re", qubit.beta.real()},
                       {"beta_im", qubit.beta.imag()}};
    report["stored"] = {{"plus_re", result.stored_plus.real()},
                        {"plus_im", result.stored_plus.imag()},
                        {"minus_re", result.stored_minus.real()},
                        {"minus_im", result.stored_minus.imag()}};
    report["released"] = {{"alpha_re", result.released.alpha.real()},
                          {"alpha_im", result.released.alpha.imag()},
                          {"beta_re", result.released.beta.real()},
                          {"beta_im", result.released.beta.imag()}};
    report["fidelity"] = result.fidelity;
    report["relative_phase_error"] = result.relative_phase_error;
    report["plus_ledger"] = {{"reflected", result.plus_cycle.ledger.reflected},
                             {"released", result.plus_cycle.ledger.released},
                             {"decayed", result.plus_cycle.ledger.decayed},
                             {"stored", result.plus_cycle.ledger.stored}};
    report["minus_ledger"] = {{"reflected", result.minus_cycle.ledger.reflected},
                              {"released", result.minus_cycle.ledger.released},
                              {"decayed", result.minus_cycle.ledger.decayed},
                              {"stored", result.minus_cycle.ledger.stored}};

    std::vector<csv::Column> cols;
    cols.push_back({"t", result.plus_cycle.grid.times()});
    write_complex_columns(cols, "phi_out_plus", result.plus_cycle.phi_out);
    write_complex_columns(cols, "phi_out_minus", result.minus_cycle.phi_out);
    cols.push_back({"population_plus", result.plus_cycle.population});
    cols.push_back({"population_minus", result.minus_cycle.population});
    csv::write((out / "polarization_envelopes.csv").string(), cols);

    Entries summary;
    summary.emplace_back("command", "polarization");
    summary.emplace_back("fidelity", format_double(result.fidelity));
    summary.emplace_back("relative_phase_error",
                         format_double(result.relative_phase_error));

    if (cfg.model == "full") {
        const ModeBank bank = bank_from_config(cfg, params);
        const FullPolarizationResult full =
            run_polarization_cycle_full(plan, pulse, qubit, bank);
        report["full_model"] = {{"stored_plus_re", full.stored_plus.real()},
                                {"stored_plus_im", full.stored_plus.imag()},
                                {"stored_minus_re", full.stored_minus.real()},
                                {"stored_minus_im", full.stored_minus.imag()},
                                {"relative_phase_error", full.relative_phase_error}};
        summary.emplace_back("full_relative_phase_error",
                             format_double(full.relative_phase_error));
    }

    std::ofstream(out / "polarization_report.json") << report.dump(2) << "\n";
    write_summary((out / "summary.txt").string(), summary);
    return 0;
}

int run_oracle_classical(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const double zeta = cfg.mirror_zeta > 0.0 ? cfg.mirror_zeta : cfg.mirror_R;
    const double tau_0 = cfg.tau_0_T > 0.0 ? cfg.tau_0_T : cfg.tau_c_T;
    const MirrorCavity cavity = MirrorCavity::make(cfg.mirror_R, zeta, cfg.tau_c_T, tau_0);

    const TimeGrid grid = grid_from_config(cfg);
    std::vector<cplx> e_in(grid.size());
    std::vector<double> e_in_real(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        e_in_real[i] = std::exp(-t * t);  // slowly varying classical drive
        e_in[i] = e_in_real[i];
    }

    const RoundTripResult res = roundtrip_simulate(cavity, grid, e_in);
    std::vector<double> e_in_used(res.grid.size());
    for (int i = 0; i < res.grid.size(); ++i) e_in_used[i] = res.e_in[i].real();
    const std::vector<double> residual =
        generalized_matching_residual(cavity, res.grid, e_in_used);

    std::vector<csv::Column> cols;
    cols.push_back({"t", res.grid.times()});
    cols.push_back({"e_in", e_in_used});
    write_complex_columns(cols, "e_c", res.e_c);
    write_complex_columns(cols, "e_out", res.e_out);
    cols.push_back({"residual", residual});
    csv::write((out / "roundtrip.csv").string(), cols);

    const int peak = res.grid.index_near(0.0);
    double max_dev = 0.0, scale = 0.0;
    for (int i = 0; i < res.grid.size(); ++i) {
        scale = std::max(scale, std::abs(res.e_c[i]));
        max_dev = std::max(max_dev, std::abs(res.e_c[i] - res.e_c_ode[i]));
    }
    Entries summary;
    summary.emplace_back("command", "oracle-classical");
    summary.emplace_back("samples_per_roundtrip", std::to_string(res.samples_per_roundtrip));
    summary.emplace_back("resampled", res.resampled ? "1" : "0");
    summary.emplace_back("out_in_ratio_at_peak",
                         format_double(std::abs(res.e_out[peak]) / std::abs(res.e_in[peak])));
    summary.emplace_back("ode_recursion_max_rel_dev",
                         format_double(scale > 0.0 ? max_dev / scale : 0.0));
    write_summary((out / "summary.txt").string(), summary);
    return 0;
}

int run_check_adiabaticity(const ScenarioConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const SystemParams params = params_from_config(cfg);
    const TimeGrid grid = grid_from_config(cfg);
    const PulseEnvelope pulse = pulse_from_config(cfg, grid);
    const ControlSchedule schedule = schedule_from_config(cfg, params, pulse);
    const AdiabaticityReport report = check_adiabaticity(params, schedule, cfg.margin);
    schedule.to_csv((out / "schedule.csv").string());

    Entries summary;
    summary.emplace_back("command", "check-adiabaticity");
    summary.emplace_back("margin", format_double(report.margin));
    summary.emplace_back("cavity_ratio", format_double(report.cavity_ratio));
    summary.emplace_back("pulse_ratio", format_double(report.pulse_ratio));
    summary.emplace_back("mixed_ratio", format_double(report.mixed_ratio));
    summary.emplace_back("collective_ratio", format_double(report.collective_ratio));
    summary.emplace_back("pass", report.pass ? "1" : "0");
    write_summary((out / "summary.txt").string(), summary);
    std::cout << (report.pass ? "pass" : "fail") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intracavity-EIT single-photon memory simulator"};
    app.require_subcommand(1);
    ScenarioConfig cfg;

    auto* c_load = app.add_subcommand("load", "capture a packet into the dark state");
    OptionSet o_load(c_load, cfg);
    o_load.bind_standard_physics();
    o_load.bind_standard_scenario();
    o_load.bind_bank();
    o_load.bind_string("model", cfg.model, "reduced | full | both");

    auto* c_cycle = app.add_subcommand("cycle", "full capture-hold-release cycle");
    OptionSet o_cycle(c_cycle, cfg);
    o_cycle.bind_standard_physics();
    o_cycle.bind_standard_scenario();
    o_cycle.bind_double("hold_T", cfg.hold_T, "hold duration, units T");

    auto* c_synth = app.add_subcommand("synthesize", "impedance-matched drive synthesis");
    OptionSet o_synth(c_synth, cfg);
    o_synth.bind_standard_physics();
    o_synth.bind_standard_scenario();
    o_synth.bind_double("margin", cfg.margin, "adiabaticity margin");

    auto* c_fig3 = app.add_subcommand("fig3", "constant-coupling input-output envelopes");
    OptionSet o_fig3(c_fig3, cfg);
    o_fig3.bind_string("pulse", cfg.pulse, "input envelope family");
    o_fig3.bind_double("delay_T", cfg.delay_T, "pulse arrival delay, units T");
    o_fig3.bind_double("grid_t0_T", cfg.grid_t0_T, "grid start, units T");
    o_fig3.bind_double("grid_t1_T", cfg.grid_t1_T, "grid end, units T");
    o_fig3.bind_int("grid_points", cfg.grid_points, "number of grid points");
    o_fig3.bind_string("gamma_eff_T_list", cfg.gamma_eff_T_list,
                       "ascending effective decay rates gamma cos^2, units 1/T");
    o_fig3.bind_double("gn_T", cfg.gn_T, "collective coupling (bookkeeping only)");
    o_fig3.bind_int("n_atoms", cfg.n_atoms, "atom count (bookkeeping only)");

    auto* c_sweep = app.add_subcommand("sweep-timing", "arrival-delay sensitivity sweep");
    OptionSet o_sweep(c_sweep, cfg);
    o_sweep.bind_standard_physics();
    o_sweep.bind_standard_scenario();
    o_sweep.bind_double("delta_min_T", cfg.delta_min_T, "smallest delay, units T");
    o_sweep.bind_double("delta_max_T", cfg.delta_max_T, "largest delay, units T");
    o_sweep.bind_int("n_deltas", cfg.n_deltas, "number of delays (log spaced)");

    auto* c_pol = app.add_subcommand("polarization", "store and release a polarization qubit");
    OptionSet o_pol(c_pol, cfg);
    o_pol.bind_standard_physics();
    o_pol.bind_standard_scenario();
    o_pol.bind_bank();
    o_pol.bind_double("hold_T", cfg.hold_T, "hold duration, units T");
    o_pol.bind_string("model", cfg.model, "reduced | full");
    o_pol.bind_double("alpha_re", cfg.alpha_re, "Re alpha of the sigma+ channel");
    o_pol.bind_double("alpha_im", cfg.alpha_im, "Im alpha");
    o_pol.bind_double("beta_re", cfg.beta_re, "Re beta of the sigma- channel");
    o_pol.bind_double("beta_im", cfg.beta_im, "Im beta");

    auto* c_oracle = app.add_subcommand("oracle-classical",
                                        "Fabry-Perot round-trip model cross-check");
    OptionSet o_oracle(c_oracle, cfg);
    o_oracle.bind_double("mirror_R", cfg.mirror_R, "input-mirror amplitude reflectivity");
    o_oracle.bind_double("mirror_zeta", cfg.mirror_zeta,
                         "round-trip amplitude loss (-1 = matched, zeta = R)");
    o_oracle.bind_double("tau_c_T", cfg.tau_c_T, "round-trip time, units T");
    o_oracle.bind_double("tau_0_T", cfg.tau_0_T, "empty-cavity round-trip time (-1 = tau_c)");
    o_oracle.bind_double("grid_t0_T", cfg.grid_t0_T, "grid start, units T");
    o_oracle.bind_double("grid_t1_T", cfg.grid_t1_T, "grid end, units T");
    o_oracle.bind_int("grid_points", cfg.grid_points, "number of grid points");

    auto* c_check = app.add_subcommand("check-adiabaticity",
                                       "evaluate adiabatic-following margins");
    OptionSet o_check(c_check, cfg);
    o_check.bind_standard_physics();
    o_check.bind_standard_scenario();
    o_check.bind_double("margin", cfg.margin, "required ratio margin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (c_load->parsed()) {
            o_load.finalize();
            return run_load(cfg);
        }
        if (c_cycle->parsed()) {
            o_cycle.finalize();
            return run_cycle_cmd(cfg);
        }
        if (c_synth->parsed()) {
            o_synth.finalize();
            return run_synthesize(cfg);
        }
        if (c_fig3->parsed()) {
            o_fig3.finalize();
            return run_fig3(cfg);
        }
        if (c_sweep->parsed()) {
            o_sweep.finalize();
            return run_sweep_timing(cfg);
        }
        if (c_pol->parsed()) {
            o_pol.finalize();
            return run_polarization(cfg);
        }
        if (c_oracle->parsed()) {
            o_oracle.finalize();
            return run_oracle_classical(cfg);
        }
        if (c_check->parsed()) {
            o_check.finalize();
            return run_check_adiabaticity(cfg);
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
