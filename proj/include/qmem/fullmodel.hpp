#pragma once

#include <vector>

#include "qmem/control.hpp"
#include "qmem/grid.hpp"
#include "qmem/params.hpp"
#include "qmem/pulses.hpp"

namespace qmem {

// Discretized continuum of free-field modes.  The flat coupling kappa_eff is
// fixed so the comb reproduces the Markov decay rate gamma:
// kappa_eff^2 * 2 pi / d_delta = gamma.
struct ModeBank {
    std::vector<double> detunings;  // uniform, symmetric about 0
    double kappa_eff = 0.0;
    double delta_max = 0.0;
    double d_delta = 0.0;

    int size() const { return static_cast<int>(detunings.size()); }

    // Recurrence time of the discrete comb; simulations must stay shorter.
    double recurrence_time() const;

    // t_pulse_hint > 0 additionally enforces the pulse-bandwidth condition
    // delta_max >= 20 / T.
    static ModeBank make(double gamma, double delta_max, int n_modes,
                         double t_pulse_hint = 0.0);
    static ModeBank standard(const SystemParams& params);
};

// Initial mode amplitudes for a traveling envelope, referenced to time t_ref:
//   xi_k = sqrt(d_delta / 2 pi) int dt phi(t) e^{+i Delta_k (t - t_ref)}.
// The free evolution xi_k(t) = xi_k e^{-i Delta_k (t - t_ref)} then rebuilds
// phi at the mirror.  The sum of |xi_k|^2 must come out 1 to 1e-6.
std::vector<cplx> encode_input_modes(const PulseEnvelope& pulse, const ModeBank& bank,
                                     double t_ref);

// Envelope reconstructed from mode amplitudes taken at time t_ref, evaluated
// on an arbitrary grid.
std::vector<cplx> decode_modes(const std::vector<cplx>& xi, const ModeBank& bank, double t_ref,
                               const TimeGrid& grid);

double mode_norm(const std::vector<cplx>& xi);

struct FullTrajectory {
    TimeGrid grid;
    std::vector<cplx> a, b, c;      // bare amplitudes
    std::vector<cplx> dark, bright; // derived through the mixing rotation
    std::vector<double> norm;       // |a|^2+|b|^2+|c|^2+sum|xi|^2
    std::vector<cplx> xi_final;     // lab-frame modes at t_end
    std::vector<std::vector<cplx>> xi_snapshots;
    std::vector<int> snapshot_indices;
    double drive_ratio_min = 0.0;   // min over the grid of Omega/(g sqrt(N) |b|)
    double step_check_error = 0.0;  // max ||D|^2(h) - |D|^2(h/2)| when checked

    double final_dark_population() const;
};

struct FullModelOptions {
    int substeps = 0;          // 0 = choose from the fastest rate on the grid
    bool step_check = true;    // re-run at half step; error above 1e-6 throws
    int snapshot_stride = 16;  // mode snapshots every Nth grid point (0 = off);
                               // the final-time modes are always stored exactly
};

// Integrates the unreduced amplitude equations
//   a' = -(gamma_a/2) a - i g sqrt(N) b - i Omega c
//   b' = -i g sqrt(N) a - i kappa sum_k xi_k
//   c' = -(gamma_c/2) c - i Omega a
//   xi_k' = -i Delta_k xi_k - i kappa b
// with each mode carried in its own rotating frame so the detuning phase is
// exact.  Returns bare and rotated amplitudes on the schedule grid.
FullTrajectory integrate_full(const SystemParams& params, const ModeBank& bank,
                              const std::vector<cplx>& xi_initial,
                              const ControlSchedule& schedule,
                              const FullModelOptions& opts = {});

// Cavity mode coupled to the bank with no atoms; used to calibrate the comb
// against the Markov decay rate and for empty-cavity scattering.
struct BareCavityTrajectory {
    TimeGrid grid;
    std::vector<cplx> b;
    std::vector<cplx> xi_final;
    std::vector<double> norm;
};

BareCavityTrajectory integrate_bare_cavity(double gamma, const ModeBank& bank,
                                           cplx b_initial, const std::vector<cplx>& xi_initial,
                                           const TimeGrid& grid, int substeps = 0);

// Amplitude decay rate fitted from ln|b| over [t_fit_start, t_fit_end],
// reported as the population rate gamma.
double fitted_cavity_decay(const TimeGrid& grid, const std::vector<cplx>& b,
                           double t_fit_start, double t_fit_end);

}  // namespace qmem
