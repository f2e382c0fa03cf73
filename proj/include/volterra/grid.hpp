#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "volterra/errors.hpp"

namespace volterra {

/// Uniform mesh t_i = i*h, i = 0..n_points-1, with n_points = floor(T/h) + 1.
class Grid {
public:
    Grid(double step, double horizon) : step_(step), horizon_(horizon)
    {
        if (!(step > 0.0) || !std::isfinite(step))
            throw ConfigError("grid step must be positive and finite");
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw ConfigError("grid horizon must be positive and finite");
        if (step > horizon)
            throw ConfigError("grid step exceeds horizon");
        // tolerate T/h landing a hair below an integer (e.g. 20/1e-3)
        n_points_ = static_cast<std::size_t>(std::floor(horizon / step + 1e-9)) + 1;
    }

    double step() const noexcept { return step_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t n_points() const noexcept { return n_points_; }
    double time(std::size_t i) const noexcept { return static_cast<double>(i) * step_; }
    double last_time() const noexcept { return time(n_points_ - 1); }

    /// Same mesh with a different horizon (used for the [0, T - θ] windows).
    Grid truncated(double horizon) const { return Grid(step_, horizon); }

    /// Index of t if t sits on a node (to ~1e-9 relative of h), else -1.
    std::ptrdiff_t node_index(double t) const noexcept
    {
        const double q = t / step_;
        const double r = std::round(q);
        if (std::abs(q - r) < 1e-9 && r >= 0.0 && r < static_cast<double>(n_points_))
            return static_cast<std::ptrdiff_t>(r);
        return -1;
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept
    {
        return a.step_ == b.step_ && a.n_points_ == b.n_points_;
    }

private:
    double step_;
    double horizon_;
    std::size_t n_points_ = 0;
};

/// Function sampled on a Grid. Linear interpolation between nodes, zero for t < 0.
class Trajectory {
public:
    explicit Trajectory(Grid grid) : grid_(grid), values_(grid.n_points(), 0.0) {}

    Trajectory(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
    {
        if (values_.size() != grid_.n_points()) {
            std::ostringstream msg;
            msg << "trajectory has " << values_.size() << " values, grid expects " << grid_.n_points();
            throw ConfigError(msg.str());
        }
    }

    template <class F>
    static Trajectory sample(Grid grid, F&& f)
    {
        Trajectory out(grid);
        for (std::size_t i = 0; i < grid.n_points(); ++i)
            out.values_[i] = f(grid.time(i));
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    double at(double t) const
    {
        if (t < 0.0)
            return 0.0;
        const double h = grid_.step();
        const double last = grid_.last_time();
        if (t > last + 1e-9 * h) {
            std::ostringstream msg;
            msg << "trajectory evaluated at t=" << t << " beyond last node " << last;
            throw DomainError(msg.str());
        }
        const double q = t / h;
        auto j = static_cast<std::size_t>(std::floor(q));
        if (j >= values_.size() - 1)
            return values_.back();
        const double w = q - static_cast<double>(j);
        return (1.0 - w) * values_[j] + w * values_[j + 1];
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline double sup_distance(const Trajectory& a, const Trajectory& b)
{
    if (!(a.grid() == b.grid()))
        throw ConfigError("sup_distance: trajectories live on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double sup_norm(const Trajectory& a)
{
    double m = 0.0;
    for (double v : a.values())
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace volterra
