#pragma once

#include <vector>

#include "qmem/control.hpp"
#include "qmem/fullmodel.hpp"
#include "qmem/grid.hpp"
#include "qmem/params.hpp"
#include "qmem/pulses.hpp"
#include "qmem/reduced.hpp"

namespace qmem {

// Capture -> hold -> release protocol.  Loading ends and release begins with
// the drive off (cos(theta) = 0), so the hold phase decouples and decays at
// the bare spin-coherence rate.
struct CyclePlan {
    SystemParams params;
    ControlSchedule load_schedule;
    double hold_duration = 0.0;
    ControlSchedule release_schedule;

    // Release schedule = loading schedule mirrored in time, placed so the
    // released packet peaks at load_end + hold + (load_end - load_center).
    static CyclePlan time_reversed(const SystemParams& params,
                                   const ControlSchedule& load_schedule, double hold_duration);
};

struct CycleLedger {
    double reflected = 0.0;  // energy leaving during loading
    double decayed = 0.0;    // lost from the spin coherence during hold
    double released = 0.0;   // energy in the released packet
    double stored = 0.0;     // still in the dark state at the end
    double closure_error = 0.0;
};

struct CycleResult {
    cplx dark_at_release{};   // D(t1), after hold decay
    double stored_initial = 0.0;  // |D(t0)|^2 at the end of loading
    CycleLedger ledger;

    TimeGrid grid;            // combined load + hold + release axis
    std::vector<cplx> phi_in;
    std::vector<cplx> phi_out;
    std::vector<double> population;

    double release_start = 0.0;
    double release_peak_time = 0.0;
    std::vector<std::string> warnings;
};

// Runs the reduced-model cycle.  The complex input_amplitude scales the unit
// input packet; amplitudes propagate linearly through every phase.
CycleResult run_cycle(const CyclePlan& plan, const PulseEnvelope& pulse,
                      cplx input_amplitude = cplx(1.0, 0.0));

struct ReleaseEnvelope {
    TimeGrid grid;
    std::vector<cplx> values;      // unnormalized
    double photon_number = 0.0;    // integral of |values|^2
    double residual_stored = 0.0;  // |D|^2 remaining at the end of the grid
};

// Closed-form released packet for a stored amplitude and a release schedule
// that starts decoupled:
//   phi_out(t) = -sqrt(gamma) D(t1) cos(theta) exp(-(gamma/2) int cos^2).
ReleaseEnvelope release_envelope(const SystemParams& params, cplx dark_at_release,
                                 const ControlSchedule& release_schedule);

// Polarization qubit riding on a shared envelope.
struct PolarizationState {
    cplx alpha{};
    cplx beta{};
    void validate() const;  // |alpha|^2 + |beta|^2 = 1 to 1e-12
};

struct PolarizationCycleResult {
    cplx stored_plus{};   // collective spin amplitude of the sigma+ channel
    cplx stored_minus{};
    PolarizationState released{};
    double fidelity = 0.0;           // overlap with the input qubit
    double relative_phase_error = 0.0;
    CycleResult plus_cycle;
    CycleResult minus_cycle;
};

PolarizationCycleResult run_polarization_cycle(const CyclePlan& plan,
                                               const PulseEnvelope& pulse,
                                               const PolarizationState& qubit);

// One schedule covering load, hold and release, for driving the unreduced
// model through the whole cycle.
ControlSchedule composite_cycle_schedule(const CyclePlan& plan, int n_points);

// Polarization cycle through the unreduced mode-bank dynamics: two channels
// with initial mode amplitudes alpha xi and beta xi.
struct FullPolarizationResult {
    cplx stored_plus{};
    cplx stored_minus{};
    double relative_phase_error = 0.0;
};

FullPolarizationResult run_polarization_cycle_full(const CyclePlan& plan,
                                                   const PulseEnvelope& pulse,
                                                   const PolarizationState& qubit,
                                                   const ModeBank& bank, int n_points = 4096);

}  // namespace qmem
