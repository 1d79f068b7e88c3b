#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qmem/control.hpp"
#include "qmem/fullmodel.hpp"
#include "qmem/params.hpp"
#include "qmem/pulses.hpp"
#include "qmem/reduced.hpp"

namespace qmem {

// Dimensionless scenario description; every rate is scaled by the pulse
// duration T, which serves as the internal time unit.
struct ScenarioConfig {
    double gamma_T = 4.0;
    double gn_T = 40.0;  // g sqrt(N) T
    double gamma_a_T = 0.0;
    double gamma_c_T = 0.0;
    int n_atoms = 100;

    std::string pulse = "sech";  // sech | gaussian | hyper_gaussian | csv:<path>
    double delay_T = 0.0;

    std::string schedule = "analytic";  // analytic | solved | constant:<v> | file:<path>
    double grid_t0_T = -10.0;
    double grid_t1_T = 10.0;
    int grid_points = 8192;

    double hold_T = 10.0;
    std::string model = "reduced";  // reduced | full | both
    double omega_cap_over_gn = 1e6;

    int n_modes = 1024;
    double bank_delta_max_T = 0.0;  // 0 = choose from gamma and T

    double margin = 100.0;

    // sweep-timing
    double delta_min_T = 0.01;
    double delta_max_T = 0.1;
    int n_deltas = 8;

    // fig3
    std::string gamma_eff_T_list = "0.1,1,10";

    // polarization
    double alpha_re = 0.70710678118654752;
    double alpha_im = 0.0;
    double beta_re = 0.5;
    double beta_im = 0.5;

    // oracle-classical
    double mirror_R = 0.99;
    double mirror_zeta = -1.0;  // -1 = impedance matched (zeta = R)
    double tau_c_T = 0.001;
    double tau_0_T = -1.0;  // -1 = tau_c

    std::string out_dir = "out";
};

SystemParams params_from_config(const ScenarioConfig& cfg);
TimeGrid grid_from_config(const ScenarioConfig& cfg);
PulseEnvelope pulse_from_config(const ScenarioConfig& cfg, const TimeGrid& grid);
ControlSchedule schedule_from_config(const ScenarioConfig& cfg, const SystemParams& params,
                                     const PulseEnvelope& pulse);
ModeBank bank_from_config(const ScenarioConfig& cfg, const SystemParams& params);

std::vector<double> parse_double_list(const std::string& text);

// Overlap of the output with the input envelope, Re <phi_in|phi_out>; the
// directly reflected component carries + sign, prompt re-emission carries -.
double reflected_overlap(const PulseEnvelope& pulse, const ReducedTrajectory& traj);

// Time for the cumulative post-pulse output energy to reach (1 - 1/e) of its
// total, measured from t_after.
double output_tail_duration(const ReducedTrajectory& traj, double t_after);

// Least-squares amplitude fit of |phi| against a sech packet of duration T
// centered at t_center; returns the relative L2 residual.
double sech_fit_residual(const TimeGrid& grid, const std::vector<cplx>& phi, double t_pulse,
                         double t_center);

// key = value summary file, deterministic ordering.
void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

std::string format_double(double v);

}  // namespace qmem
