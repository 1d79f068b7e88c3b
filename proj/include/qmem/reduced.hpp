#pragma once

#include <string>
#include <vector>

#include "qmem/control.hpp"
#include "qmem/grid.hpp"
#include "qmem/params.hpp"
#include "qmem/pulses.hpp"

namespace qmem {

// Dark-state amplitude and loading-phase output on the shared grid.
struct ReducedTrajectory {
    TimeGrid grid;
    std::vector<cplx> dark;         // D(t)
    std::vector<cplx> phi_out;      // phi_in - sqrt(gamma) cos(theta) D
    std::vector<double> population; // |D(t)|^2
    std::vector<std::string> warnings;

    // Max deviation of |D|^2 + int |phi_out|^2 - int |phi_in|^2 from zero;
    // probes probability exchange with the free field (gamma_c = 0).
    double ledger_max_residual = 0.0;

    double final_dark_abs() const;
};

struct ReducedOptions {
    int substeps = 4;  // RK4 substeps per grid interval
};

// Step integration of the adiabatic dark-state equation
//   dD/dt = sqrt(gamma) cos(theta) phi_in - [(gamma/2)cos^2 + (gamma_c/2)sin^2] D.
// The gamma_c term extends the loading equation to a finite spin-coherence
// lifetime; it vanishes in the default gamma_c = 0 runs.
ReducedTrajectory integrate_dark_state(const SystemParams& params, const PulseEnvelope& pulse,
                                       const ControlSchedule& schedule,
                                       const ReducedOptions& opts = {});

// Independent evaluation of the same amplitude through the closed-form
// quadrature with the memory integral differenced from one cumulative
// integral; uses only grid-point data.
ReducedTrajectory quadrature_solution(const SystemParams& params, const PulseEnvelope& pulse,
                                      const ControlSchedule& schedule);

// Input-output relation during loading (quadrature route for D).
ReducedTrajectory loading_output(const SystemParams& params, const PulseEnvelope& pulse,
                                 const ControlSchedule& schedule);

// Final dark amplitude |D(t_end)| for the pulse arriving shifted by each
// delta; the schedule stays fixed at its matched timing.
std::vector<double> timing_sensitivity(const SystemParams& params, const PulseEnvelope& pulse,
                                       const ControlSchedule& schedule,
                                       const std::vector<double>& deltas);

// Reflected energy integral of |phi_out|^2 over the loading grid.
double reflected_energy(const ReducedTrajectory& traj);

}  // namespace qmem
