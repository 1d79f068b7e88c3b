#include "qmem/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qmem/csv.hpp"
#include "qmem/numerics.hpp"

namespace qmem {

namespace {

constexpr double kEdgeFraction = 1e-6;  // tail tolerance at the grid boundary

// In-place radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cplx wl = std::polar(1.0, ang);
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double family_shape(PulseFamily family, double u) {
    switch (family) {
        case PulseFamily::sech: return 1.0 / std::cosh(2.0 * u);
        case PulseFamily::gaussian: return std::exp(-u * u);
        case PulseFamily::hyper_gaussian: return std::exp(-u * u * u * u);
        case PulseFamily::custom: break;
    }
    return 0.0;
}

}  // namespace

std::string to_string(PulseFamily family) {
    switch (family) {
        case PulseFamily::sech: return "sech";
        case PulseFamily::gaussian: return "gaussian";
        case PulseFamily::hyper_gaussian: return "hyper_gaussian";
        case PulseFamily::custom: return "custom";
    }
    return "?";
}

double PulseEnvelope::shape(double t) const {
    return family_shape(family_, (t - delay_) / t_pulse_);
}

PulseEnvelope::PulseEnvelope(TimeGrid grid, std::vector<cplx> values, PulseFamily family,
                             double t_pulse, double delay, bool renormalize)
    : grid_(grid), values_(std::move(values)), family_(family), t_pulse_(t_pulse),
      delay_(delay) {
    if (static_cast<int>(values_.size()) != grid_.size())
        throw std::invalid_argument("PulseEnvelope: sample count does not match grid");
    if (grid_.size() < 8)
        throw std::invalid_argument("PulseEnvelope: grid too coarse for an envelope");

    if (renormalize) {
        std::vector<double> sq(values_.size());
        for (size_t i = 0; i < values_.size(); ++i) sq[i] = std::norm(values_[i]);
        const double norm = num::integral<double>(sq, grid_.dt());
        if (!(norm > 0.0))
            throw std::invalid_argument("PulseEnvelope: zero envelope cannot be normalized");
        const double scale = 1.0 / std::sqrt(norm);
        for (auto& v : values_) v *= scale;
        amplitude_ = scale;
    } else {
        amplitude_ = 1.0;
    }

    max_abs_ = 0.0;
    for (const auto& v : values_) max_abs_ = std::max(max_abs_, std::abs(v));
    const double edge = std::max(std::abs(values_.front()), std::abs(values_.back()));
    if (edge >= kEdgeFraction * max_abs_)
        throw std::invalid_argument(
            "PulseEnvelope: grid truncates the packet (boundary amplitude " +
            std::to_string(edge / max_abs_) + " of peak)");
}

PulseEnvelope PulseEnvelope::make_family(const TimeGrid& grid, double t_pulse, double delay,
                                         PulseFamily family) {
    if (!(t_pulse > 0.0)) throw std::invalid_argument("pulse: t_pulse must be > 0");
    if (grid.t_start() > delay - 6.0 * t_pulse || grid.t_end() < delay + 6.0 * t_pulse)
        throw std::invalid_argument("pulse: grid must span at least [-6T, +6T] around delay");
    std::vector<cplx> v(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        v[i] = family_shape(family, (grid.time(i) - delay) / t_pulse);
    return PulseEnvelope(grid, std::move(v), family, t_pulse, delay, true);
}

PulseEnvelope PulseEnvelope::make_sech(const TimeGrid& grid, double t_pulse, double delay) {
    return make_family(grid, t_pulse, delay, PulseFamily::sech);
}

PulseEnvelope PulseEnvelope::make_gaussian(const TimeGrid& grid, double t_pulse, double delay) {
    return make_family(grid, t_pulse, delay, PulseFamily::gaussian);
}

PulseEnvelope PulseEnvelope::make_hyper_gaussian(const TimeGrid& grid, double t_pulse,
                                                 double delay) {
    return make_family(grid, t_pulse, delay, PulseFamily::hyper_gaussian);
}

PulseEnvelope PulseEnvelope::from_samples(const TimeGrid& grid, std::vector<cplx> values,
                                          double t_pulse) {
    return PulseEnvelope(grid, std::move(values), PulseFamily::custom, t_pulse, 0.0, true);
}

PulseEnvelope PulseEnvelope::from_csv(const std::string& path, double t_pulse) {
    const auto table = csv::read(path);
    if (table.n_cols() < 2 || table.n_cols() > 3)
        throw std::invalid_argument("pulse csv: expected columns (t, re[, im])");
    if (table.n_rows() < 8) throw std::invalid_argument("pulse csv: too few rows");
    const auto& t = table.columns[0];
    const double dt = (t.back() - t.front()) / (t.size() - 1);
    if (!(dt > 0.0)) throw std::invalid_argument("pulse csv: time column must increase");
    // tolerance covers the 12-digit print quantization of large |t|
    const double tol = 1e-6 * dt + 1e-11 * std::max(std::abs(t.front()), std::abs(t.back()));
    for (size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > tol)
            throw std::invalid_argument("pulse csv: time column must be uniform");
    std::vector<cplx> v(t.size());
    for (size_t i = 0; i < t.size(); ++i)
        v[i] = cplx(table.columns[1][i], table.n_cols() == 3 ? table.columns[2][i] : 0.0);
    return from_samples(TimeGrid(t.front(), t.back(), static_cast<int>(t.size())),
                        std::move(v), t_pulse);
}

cplx PulseEnvelope::value_at(double t) const {
    if (family_ != PulseFamily::custom) return amplitude_ * shape(t);
    if (!grid_.contains(t)) return 0.0;
    return num::interp_cubic<cplx>(values_, grid_.position(t));
}

bool PulseEnvelope::is_real_positive() const {
    for (const auto& v : values_) {
        if (std::abs(v.imag()) > 1e-12 * max_abs_) return false;
        if (v.real() < 0.0) return false;
    }
    return true;
}

double PulseEnvelope::log_derivative_at(double t) const {
    const double u = (t - delay_) / t_pulse_;
    switch (family_) {
        case PulseFamily::sech: return -(2.0 / t_pulse_) * std::tanh(2.0 * u);
        case PulseFamily::gaussian: return -2.0 * u / t_pulse_;
        case PulseFamily::hyper_gaussian: return -4.0 * u * u * u / t_pulse_;
        case PulseFamily::custom: break;
    }
    const double h = grid_.dt() / 2.0;
    auto lnphi = [this](double s) {
        const cplx v = value_at(s);
        if (!(v.real() > 0.0) || std::abs(v.imag()) > 1e-12 * max_abs_)
            throw std::invalid_argument(
                "log_derivative_at: envelope not real and positive at t = " + std::to_string(s));
        return std::log(v.real());
    };
    // keep the difference stencil inside the sampled window
    const double t_eval =
        std::clamp(t, grid_.t_start() + 2.0 * h, grid_.t_end() - 2.0 * h);
    return num::derivative(lnphi, t_eval, h);
}

PulseEnvelope PulseEnvelope::shift(double delta_t) const {
    if (family_ != PulseFamily::custom)
        return make_family(grid_, t_pulse_, delay_ + delta_t, family_);

    // Spectral shift: phase ramp in the conjugate domain, exact inverse under
    // shifting back.  Zero-pad to keep the wrap-around away from the data.
    const size_t n = values_.size();
    const size_t m = next_pow2(2 * n);
    std::vector<cplx> work(m, cplx(0.0));
    std::copy(values_.begin(), values_.end(), work.begin());
    fft_pow2(work, false);
    const double dt = grid_.dt();
    for (size_t j = 0; j < m; ++j) {
        const double freq_index = (j <= m / 2) ? static_cast<double>(j)
                                               : static_cast<double>(j) - static_cast<double>(m);
        const double omega = 2.0 * std::numbers::pi * freq_index / (static_cast<double>(m) * dt);
        work[j] *= std::polar(1.0, -omega * delta_t);
    }
    fft_pow2(work, true);
    std::vector<cplx> out(work.begin(), work.begin() + n);
    // The constructor re-checks the boundary invariant and reports truncation.
    return PulseEnvelope(grid_, std::move(out), PulseFamily::custom, t_pulse_, delay_ + delta_t,
                         false);
}

double PulseEnvelope::peak_time() const {
    int best = 0;
    double best_abs = -1.0;
    for (int i = 0; i < grid_.size(); ++i) {
        const double a = std::abs(values_[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return grid_.time(best);
}

}  // namespace qmem
