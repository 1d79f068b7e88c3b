#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmem::num {

using cplx = std::complex<double>;

// Cumulative integral of uniformly sampled data, 4th order.  Interior
// intervals integrate the cubic through the surrounding four samples;
// the first and last intervals use one-sided stencils.
template <typename T>
std::vector<T> cumulative_integral(std::span<const T> f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 4) throw std::invalid_argument("cumulative_integral: need >= 4 samples");
    std::vector<T> out(n);
    out[0] = T{};
    const double c = h / 24.0;
    out[1] = out[0] + c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    for (int i = 1; i + 2 < n; ++i)
        out[i + 1] = out[i] + c * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
    out[n - 1] = out[n - 2] + c * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]);
    return out;
}

template <typename T>
T integral(std::span<const T> f, double h) {
    return cumulative_integral(f, h).back();
}

// Value of the cubic through four uniform samples y[i0..i0+3] evaluated at
// fractional offset x from y[i0] (x in units of the sample spacing).
template <typename T>
T lagrange4(const T* y, double x) {
    const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
    const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
    const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
    return w0 * y[0] + w1 * y[1] + w2 * y[2] + w3 * y[3];
}

// Cubic interpolation on a uniform grid at fractional index u in [0, n-1].
template <typename T>
T interp_cubic(std::span<const T> y, double u) {
    const int n = static_cast<int>(y.size());
    if (n < 4) throw std::invalid_argument("interp_cubic: need >= 4 samples");
    if (u <= 0.0) u = 0.0;
    if (u >= n - 1) u = static_cast<double>(n - 1);
    int i0 = static_cast<int>(u) - 1;
    if (i0 < 0) i0 = 0;
    if (i0 > n - 4) i0 = n - 4;
    return lagrange4(y.data() + i0, u - i0);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Slope of log(y) against log(x); x and y must be positive.
double power_law_exponent(std::span<const double> x, std::span<const double> y);

// Richardson-extrapolated central difference of a callable, O(h^4).
template <typename F>
double derivative(F&& f, double t, double h) {
    const double d1 = (f(t + h) - f(t - h)) / (2.0 * h);
    const double d2 = (f(t + h / 2.0) - f(t - h / 2.0)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

// Classical fixed-step RK4 for a scalar state (double or complex).
template <typename T, typename F>
T rk4_step(F&& rhs, double t, const T& y, double h) {
    const T k1 = rhs(t, y);
    const T k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const T k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const T k4 = rhs(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace qmem::num
