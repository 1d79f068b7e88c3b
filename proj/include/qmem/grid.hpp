#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qmem {

// Uniform time grid shared by pulses, schedules and trajectories.
class TimeGrid {
public:
    // Placeholder unit grid; real grids come from the validating constructor.
    TimeGrid() : t_start_(0.0), t_end_(1.0), n_points_(2) {}

    TimeGrid(double t_start, double t_end, int n_points)
        : t_start_(t_start), t_end_(t_end), n_points_(n_points) {
        if (!(t_start < t_end))
            throw std::invalid_argument("TimeGrid: t_start must be < t_end");
        if (n_points < 2)
            throw std::invalid_argument("TimeGrid: need at least 2 points");
        if (!std::isfinite(t_start) || !std::isfinite(t_end))
            throw std::invalid_argument("TimeGrid: bounds must be finite");
    }

    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    int size() const { return n_points_; }
    double dt() const { return (t_end_ - t_start_) / (n_points_ - 1); }
    double span() const { return t_end_ - t_start_; }

    double time(int i) const {
        return t_start_ + (t_end_ - t_start_) * static_cast<double>(i) / (n_points_ - 1);
    }

    // Fractional index of t; callers clamp as needed.
    double position(double t) const { return (t - t_start_) / dt(); }

    int index_near(double t) const {
        int i = static_cast<int>(std::lround(position(t)));
        if (i < 0) i = 0;
        if (i >= n_points_) i = n_points_ - 1;
        return i;
    }

    bool contains(double t) const { return t >= t_start_ && t <= t_end_; }

    std::vector<double> times() const {
        std::vector<double> out(n_points_);
        for (int i = 0; i < n_points_; ++i) out[i] = time(i);
        return out;
    }

    bool same_as(const TimeGrid& other) const {
        return t_start_ == other.t_start_ && t_end_ == other.t_end_ &&
               n_points_ == other.n_points_;
    }

private:
    double t_start_;
    double t_end_;
    int n_points_;
};

}  // namespace qmem
