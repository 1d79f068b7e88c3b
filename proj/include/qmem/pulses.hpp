#pragma once

#include <string>
#include <vector>

#include "qmem/grid.hpp"
#include "qmem/params.hpp"

namespace qmem {

enum class PulseFamily { sech, gaussian, hyper_gaussian, custom };

std::string to_string(PulseFamily family);

// Normalized complex envelope phi(t) on a time grid.  The stored samples obey
// the traveling-packet normalization  sum |phi|^2 dt = 1;  analytic families
// also evaluate off-grid through their closed form.
class PulseEnvelope {
public:
    static PulseEnvelope make_sech(const TimeGrid& grid, double t_pulse, double delay);
    static PulseEnvelope make_gaussian(const TimeGrid& grid, double t_pulse, double delay);
    static PulseEnvelope make_hyper_gaussian(const TimeGrid& grid, double t_pulse, double delay);

    // Arbitrary sampled envelope; renormalized numerically.  t_pulse is an
    // optional bandwidth hint (0 = unknown).
    static PulseEnvelope from_samples(const TimeGrid& grid, std::vector<cplx> values,
                                      double t_pulse = 0.0);

    // CSV import: header line required, columns (t, re[, im]) on a uniform grid.
    static PulseEnvelope from_csv(const std::string& path, double t_pulse = 0.0);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }
    PulseFamily family() const { return family_; }
    double t_pulse() const { return t_pulse_; }
    double delay() const { return delay_; }

    // Numeric normalization constant of the analytic families (peak amplitude).
    double amplitude() const { return amplitude_; }
    double max_abs() const { return max_abs_; }

    cplx value_at(double t) const;

    // d/dt ln phi(t); the envelope must be real and positive there.
    double log_derivative_at(double t) const;
    bool is_real_positive() const;

    // phi'(t) = phi(t - delta_t).  Analytic families re-evaluate with a moved
    // delay; sampled envelopes are shifted by a band-limited spectral phase.
    PulseEnvelope shift(double delta_t) const;

    double peak_time() const;

private:
    PulseEnvelope(TimeGrid grid, std::vector<cplx> values, PulseFamily family,
                  double t_pulse, double delay, bool renormalize);

    static PulseEnvelope make_family(const TimeGrid& grid, double t_pulse, double delay,
                                     PulseFamily family);

    double shape(double t) const;  // unit-peak analytic shape

    TimeGrid grid_;
    std::vector<cplx> values_;
    PulseFamily family_;
    double t_pulse_;
    double delay_;
    double amplitude_ = 0.0;
    double max_abs_ = 0.0;
};

}  // namespace qmem
