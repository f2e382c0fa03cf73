#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/grid.hpp"

namespace volterra {

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

/// Density part k(s) of a measure, supported on [0, s_max]. Infinite-support
/// kernels must be truncated by the caller; the library never truncates.
class Density {
public:
    Density(std::string name, std::function<double(double)> fn, double s_max)
        : name_(std::move(name)), fn_(std::move(fn)), s_max_(s_max)
    {
        if (!fn_)
            throw ConfigError("density '" + name_ + "' has no function");
        if (!(s_max > 0.0) || !std::isfinite(s_max))
            throw ConfigError("density '" + name_ + "' needs a finite positive s_max");
    }

    static Density exp_decay(double coefficient, double rate, double s_max)
    {
        return Density("exp_decay", [=](double s) { return coefficient * std::exp(-rate * s); }, s_max);
    }

    static Density constant(double c, double s_max)
    {
        return Density("constant", [=](double) { return c; }, s_max);
    }

    /// k(s) = Σ c_j s^j
    static Density polynomial(std::vector<double> coefficients, double s_max)
    {
        return Density(
            "polynomial",
            [c = std::move(coefficients)](double s) {
                double acc = 0.0;
                for (auto it = c.rbegin(); it != c.rend(); ++it)
                    acc = acc * s + *it;
                return acc;
            },
            s_max);
    }

    const std::string& name() const noexcept { return name_; }
    double s_max() const noexcept { return s_max_; }

    /// k(s) on [0, s_max], zero elsewhere. Throws EvaluationError on a non-finite value.
    double operator()(double s) const
    {
        if (s < 0.0 || s > s_max_)
            return 0.0;
        const double v = fn_(s);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "density '" << name_ << "' evaluation failed at node s=" << s;
            throw EvaluationError(msg.str());
        }
        return v;
    }

private:
    std::string name_;
    std::function<double(double)> fn_;
    double s_max_;
};

/// Finite signed Borel measure on [0, ∞): finitely many atoms plus an optional density.
class Measure {
public:
    Measure() = default;

    explicit Measure(std::vector<Atom> atoms, std::optional<Density> density = std::nullopt)
        : atoms_(std::move(atoms)), density_(std::move(density))
    {
        for (const auto& a : atoms_) {
            if (!std::isfinite(a.location) || a.location < 0.0)
                throw ConfigError("atom location must be finite and >= 0");
            if (!std::isfinite(a.weight))
                throw ConfigError("atom weight must be finite");
        }
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& x, const Atom& y) { return x.location < y.location; });
        for (std::size_t i = 1; i < atoms_.size(); ++i)
            if (atoms_[i].location == atoms_[i - 1].location)
                throw ConfigError("atom locations must be pairwise distinct");
    }

    static Measure point_mass(double location, double weight) { return Measure({{location, weight}}); }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::optional<Density>& density() const noexcept { return density_; }
    bool empty() const noexcept { return atoms_.empty() && !density_; }

    /// ν({0})
    double mass_at_zero() const noexcept
    {
        return (!atoms_.empty() && atoms_.front().location == 0.0) ? atoms_.front().weight : 0.0;
    }

private:
    std::vector<Atom> atoms_;
    std::optional<Density> density_;
};

/// |ν|(ℝ₊) = Σ|w_j| + ∫_0^{s_max}|k|, density part by composite trapezoid with `panels` panels.
inline double total_variation(const Measure& m, std::size_t panels = 20000)
{
    double tv = 0.0;
    for (const auto& a : m.atoms())
        tv += std::abs(a.weight);
    if (const auto& d = m.density()) {
        if (panels == 0)
            throw ConfigError("total_variation needs at least one panel");
        const double step = d->s_max() / static_cast<double>(panels);
        double acc = 0.5 * (std::abs((*d)(0.0)) + std::abs((*d)(d->s_max())));
        for (std::size_t j = 1; j < panels; ++j)
            acc += std::abs((*d)(step * static_cast<double>(j)));
        tv += acc * step;
    }
    return tv;
}

/// (ν∗x)(t) = Σ_{τ_j ≤ t} w_j x(t − τ_j) + ∫_0^{min(t, s_max)} k(s) x(t − s) ds.
/// Atoms off the grid use linear interpolation of x; the density integral is a
/// composite trapezoid on the grid spacing with a partial last panel.
inline double convolve_measure(const Measure& m, const Trajectory& x, double t)
{
    const Grid& g = x.grid();
    if (t < 0.0 || t > g.last_time() + 1e-9 * g.step()) {
        std::ostringstream msg;
        msg << "convolve_measure: t=" << t << " outside [0, " << g.last_time() << "]";
        throw DomainError(msg.str());
    }
    double acc = 0.0;
    for (const auto& a : m.atoms()) {
        if (a.location > t + 1e-12 * g.step())
            break;
        acc += a.weight * x.at(std::max(0.0, t - a.location));
    }
    if (const auto& d = m.density()) {
        const double upper = std::min(t, d->s_max());
        const double h = g.step();
        const auto full = static_cast<std::size_t>(std::floor(upper / h + 1e-9));
        double dens = 0.0;
        for (std::size_t j = 0; j < full; ++j) {
            const double s0 = h * static_cast<double>(j);
            const double s1 = s0 + h;
            dens += 0.5 * h * ((*d)(s0) * x.at(std::max(0.0, t - s0)) + (*d)(s1) * x.at(std::max(0.0, t - s1)));
        }
        const double s0 = h * static_cast<double>(full);
        const double rest = upper - s0;
        if (rest > 1e-12 * h)
            dens += 0.5 * rest * ((*d)(s0) * x.at(std::max(0.0, t - s0)) + (*d)(upper) * x.at(std::max(0.0, t - upper)));
        acc += dens;
    }
    return acc;
}

/// Split of (ν∗x)(t_i) into the part that does not involve x_i and the
/// coefficient multiplying x_i. Implicit steppers solve for x_i from this.
struct NodeSplit {
    double history = 0.0;
    double self_weight = 0.0;
};

/// Precomputed quadrature of ν∗x at grid nodes; agrees with convolve_measure at t = t_i.
class NodeConvolver {
public:
    NodeConvolver(const Measure& m, const Grid& g) : grid_(g)
    {
        const double h = g.step();
        for (const auto& a : m.atoms()) {
            const double q = a.location / h;
            auto lag = static_cast<std::size_t>(std::floor(q + 1e-9));
            double frac = q - static_cast<double>(lag);
            if (frac < 1e-9)
                frac = 0.0;
            taps_.push_back({a.location, a.weight, lag, frac});
        }
        if (const auto& d = m.density()) {
            has_density_ = true;
            s_max_ = d->s_max();
            full_ = static_cast<std::size_t>(std::floor(s_max_ / h + 1e-9));
            const std::size_t count = std::min(full_, g.n_points() - 1) + 1;
            kernel_.resize(count);
            for (std::size_t j = 0; j < count; ++j)
                kernel_[j] = (*d)(h * static_cast<double>(j));
            rest_ = s_max_ - h * static_cast<double>(full_);
            if (rest_ <= 1e-12 * h)
                rest_ = 0.0;
            kernel_end_ = (*d)(s_max_);
            kernel_full_ = full_ < g.n_points() ? (*d)(h * static_cast<double>(full_)) : 0.0;
        }
    }

    const Grid& grid() const noexcept { return grid_; }

    /// (ν∗x)(t_i) with x_i excluded, plus the weight of x_i.
    NodeSplit split(std::span<const double> x, std::size_t i) const
    {
        NodeSplit out = density_split(x, i);
        for (const auto& tap : taps_) {
            if (tap.lag > i || (tap.lag == i && tap.frac > 0.0))
                break;
            const double w0 = tap.weight * (1.0 - tap.frac);
            const double w1 = tap.weight * tap.frac;
            if (tap.lag == 0)
                out.self_weight += w0;
            else
                out.history += w0 * x[i - tap.lag];
            if (w1 != 0.0)
                out.history += w1 * x[i - tap.lag - 1];
        }
        return out;
    }

    /// Jump of ν∗x at t_i: atoms sitting exactly at t_i > 0 switch on w·x(0) there.
    /// split/value give right limits; subtract this for the left limit.
    double onset(std::span<const double> x, std::size_t i) const
    {
        double jump = 0.0;
        for (const auto& tap : taps_)
            if (tap.lag == i && tap.frac == 0.0 && i > 0)
                jump += tap.weight * x[0];
        return jump;
    }

    double value(std::span<const double> x, std::size_t i) const
    {
        const auto s = split(x, i);
        return s.history + s.self_weight * x[i];
    }

    /// Density contribution only, ∫ k(s) x(t_i − s) ds.
    double density_value(std::span<const double> x, std::size_t i) const
    {
        const auto s = density_split(x, i);
        return s.history + s.self_weight * x[i];
    }

    struct Tap {
        double location;
        double weight;
        std::size_t lag;
        double frac;
    };
    const std::vector<Tap>& taps() const noexcept { return taps_; }

private:
    NodeSplit density_split(std::span<const double> x, std::size_t i) const
    {
        NodeSplit out;
        if (!has_density_ || i == 0)
            return out;
        const double h = grid_.step();
        const std::size_t upper = std::min(i, full_);
        if (upper >= 1) {
            // trapezoid over s_j = j h, j = 0..upper
            double acc = 0.0;
            for (std::size_t j = 1; j < upper; ++j)
                acc += kernel_[j] * x[i - j];
            acc += 0.5 * kernel_[upper] * x[i - upper];
            out.history += h * acc;
            out.self_weight += 0.5 * h * kernel_[0];
        }
        if (i > full_ && rest_ > 0.0) {
            // partial panel [full h, s_max]; x(t_i - s_max) interpolated between nodes
            const std::size_t hi = i - full_;
            const double frac = rest_ / h;
            const double left = 0.5 * rest_ * kernel_full_;
            const double right = 0.5 * rest_ * kernel_end_;
            auto add = [&](std::size_t idx, double w) {
                if (idx == i)
                    out.self_weight += w;
                else
                    out.history += w * x[idx];
            };
            add(hi, left);
            add(hi, right * (1.0 - frac));
            add(hi - 1, right * frac);
        }
        return out;
    }

    Grid grid_;
    std::vector<Tap> taps_;
    bool has_density_ = false;
    double s_max_ = 0.0;
    std::size_t full_ = 0;
    double rest_ = 0.0;
    double kernel_end_ = 0.0;
    double kernel_full_ = 0.0;
    std::vector<double> kernel_;
};

} // namespace volterra
