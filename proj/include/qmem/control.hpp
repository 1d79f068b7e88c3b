#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmem/grid.hpp"
#include "qmem/params.hpp"
#include "qmem/pulses.hpp"

namespace qmem {

// Ratios probing the adiabatic-elimination conditions; each must exceed the
// margin for the reduced dynamics to be trusted.
struct AdiabaticityReport {
    double margin = 100.0;
    double cavity_ratio = 0.0;      // min Omega0^2 / (gamma gamma_a)
    double pulse_ratio = 0.0;       // min Omega0^2 T / gamma_a
    double mixed_ratio = 0.0;       // min Omega0^2 / (sqrt(gamma/T) gamma_a)
    double collective_ratio = 0.0;  // g^2 N / (gamma gamma_a)
    bool pass = false;
};

// Sampled mixing-angle schedule cos(theta)(t) with the matching drive
// Omega(t).  Synthesis functions may attach a closed-form evaluator so that
// integrators can sample between grid points without interpolation error.
class ControlSchedule {
public:
    using Eval = std::function<double(double)>;

    static ControlSchedule from_cos_theta(const SystemParams& params, const TimeGrid& grid,
                                          std::vector<double> cos_theta, Eval eval = nullptr);
    static ControlSchedule constant(const SystemParams& params, const TimeGrid& grid,
                                    double cos_value);
    static ControlSchedule from_csv(const SystemParams& params, const std::string& path);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& cos_theta() const { return cos_theta_; }
    const std::vector<double>& omega() const { return omega_; }
    bool feasible() const { return feasible_; }
    const std::string& diagnostic() const { return diagnostic_; }
    double collective_coupling() const { return gsqrt_n_; }
    double omega_cap() const { return omega_cap_; }
    int clamp_events() const { return clamp_events_; }
    int cap_events() const { return cap_events_; }
    const std::optional<AdiabaticityReport>& margin_report() const { return margin_report_; }

    double cos_theta_at(double t) const;
    double omega_at(double t) const;

    bool has_closed_form() const { return static_cast<bool>(eval_); }

    // Schedule mirrored in time about t_mirror (release = reversed loading).
    ControlSchedule reversed_about(double t_mirror) const;

    // Same schedule with the drive capped at a different value.
    ControlSchedule with_omega_cap(double cap) const;

    void to_csv(const std::string& path) const;

    friend ControlSchedule sech_matched_cos_theta(const SystemParams&, const TimeGrid&, double);
    friend ControlSchedule sech_matched_omega(const SystemParams&, const TimeGrid&, double);
    friend ControlSchedule solve_impedance_matching(const SystemParams&, const PulseEnvelope&,
                                                    double);

private:
    ControlSchedule(const SystemParams& params, const TimeGrid& grid);

    void fill_omega_from_cos_theta();
    void attach_margins(const SystemParams& params);

    TimeGrid grid_;
    std::vector<double> cos_theta_;
    std::vector<double> omega_;
    Eval eval_;
    bool feasible_ = true;
    std::string diagnostic_;
    double gsqrt_n_;
    double t_pulse_;
    double gamma_;
    double gamma_a_;
    double omega_cap_;
    int clamp_events_ = 0;
    int cap_events_ = 0;
    std::optional<AdiabaticityReport> margin_report_;
};

// Closed-form impedance-matched schedule for the sech input packet centered
// at `center`:  cos(theta)^2 = (2 / gamma T) (1 - tanh(2(t-center)/T)).
// Requires gamma T >= 4; below that the drive would need cos(theta) > 1 and
// the schedule is returned marked infeasible.
ControlSchedule sech_matched_cos_theta(const SystemParams& params, const TimeGrid& grid,
                                       double center = 0.0);

// The same schedule expressed through the drive Rabi frequency,
//   Omega = g sqrt(N) sqrt(1 - tanh u) / sqrt(tanh u + gamma T/2 - 1),
// capped at omega_cap near the early-time divergence.
ControlSchedule sech_matched_omega(const SystemParams& params, const TimeGrid& grid,
                                   double center = 0.0);

// Numeric impedance matching for an arbitrary real positive envelope:
// integrates  d/dt cos(theta) = cos(theta) d/dt ln phi - (gamma/2) cos^3(theta)
// forward from cos_theta_start, clamping cos(theta) to [1e-12, 1].
ControlSchedule solve_impedance_matching(const SystemParams& params, const PulseEnvelope& pulse,
                                         double cos_theta_start);

// Start value heuristic for non-sech pulses: the asymptote of the matched
// sech solution.
double default_matching_start(const SystemParams& params);

AdiabaticityReport check_adiabaticity(const SystemParams& params,
                                      const ControlSchedule& schedule, double margin = 100.0);

}  // namespace qmem
