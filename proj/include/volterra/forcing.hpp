#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/grid.hpp"
#include "volterra/oscillatory.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

/// ∫_a^b (s − a)^m f(s) ds for m = 0..3.
using Moments = std::array<double, 4>;

enum class ForcingKind { osc_growth, lp_member, step_train, constant, sine, tabulated, sum };

/// Forcing term f, extended by zero to t < 0.
///
/// Every kind supplies exact (or rounding-accurate) weighted integrals over
/// arbitrary intervals. All integrals of f taken by the library go through
/// moments(), never through samples of f, so rapidly oscillating kinds stay
/// accurate on grids that do not resolve them.
class ForcingFunction {
public:
    struct OscGrowth {
        OscillatoryMoments engine;
    };
    struct LpMember {
        enum class Shape { exp_decay, inverse_linear, power } shape;
        double parameter; // rate for exp_decay, exponent for power
    };
    struct StepTrain {
        std::vector<double> amplitudes;
        std::vector<double> breakpoints; // size amplitudes + 1, starts at 0
    };
    struct Constant {
        double c;
    };
    struct Sine {
        double amplitude;
        double frequency; // cycles per unit time
    };
    struct Tabulated {
        Trajectory table;
    };
    struct Term;
    struct Sum {
        std::vector<Term> terms;
    };
    using Node = std::variant<OscGrowth, LpMember, StepTrain, Constant, Sine, Tabulated, Sum>;

    static ForcingFunction osc_growth(double alpha, double beta)
    {
        return ForcingFunction(OscGrowth{OscillatoryMoments(alpha, beta)});
    }
    static ForcingFunction exp_decay(double rate)
    {
        if (!(rate > 0.0))
            throw ConfigError("exp_decay rate must be positive");
        return ForcingFunction(LpMember{LpMember::Shape::exp_decay, rate});
    }
    /// 1/(1+t)
    static ForcingFunction inverse_linear() { return ForcingFunction(LpMember{LpMember::Shape::inverse_linear, 1.0}); }
    /// (1+t)^{-γ}
    static ForcingFunction power_decay(double exponent)
    {
        if (!(exponent > 0.0))
            throw ConfigError("power exponent must be positive");
        return ForcingFunction(LpMember{LpMember::Shape::power, exponent});
    }
    static ForcingFunction step_train(std::vector<double> amplitudes, const std::vector<double>& widths)
    {
        if (amplitudes.size() != widths.size() || amplitudes.empty())
            throw ConfigError("step_train needs matching, nonempty amplitudes and widths");
        std::vector<double> bp{0.0};
        for (double w : widths) {
            if (!(w > 0.0))
                throw ConfigError("step_train widths must be positive");
            bp.push_back(bp.back() + w);
        }
        return ForcingFunction(StepTrain{std::move(amplitudes), std::move(bp)});
    }
    static ForcingFunction constant(double c) { return ForcingFunction(Constant{c}); }
    static ForcingFunction sine(double amplitude, double frequency)
    {
        if (!(frequency > 0.0))
            throw ConfigError("sine frequency must be positive");
        return ForcingFunction(Sine{amplitude, frequency});
    }
    static ForcingFunction tabulated(Trajectory table) { return ForcingFunction(Tabulated{std::move(table)}); }
    static ForcingFunction sum(std::vector<Term> terms);

    ForcingKind kind() const noexcept { return static_cast<ForcingKind>(node_->index()); }
    const Node& node() const noexcept { return *node_; }
    std::string describe() const;

    double eval(double t) const;
    Moments moments(double a, double b) const;
    double integral(double a, double b) const { return moments(a, b)[0]; }

    /// Largest t for which a grid of step h resolves f (at most 0.2 rad of
    /// oscillation per step); +∞ for non-oscillatory kinds.
    double resolved_until(double h) const;

private:
    explicit ForcingFunction(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

    Moments moments_nonnegative(double a, double b) const;

    std::shared_ptr<const Node> node_;
};

struct ForcingFunction::Term {
    double weight;
    ForcingFunction function;
};

inline ForcingFunction ForcingFunction::sum(std::vector<Term> terms)
{
    if (terms.empty())
        throw ConfigError("sum forcing needs at least one term");
    return ForcingFunction(Sum{std::move(terms)});
}

namespace detail {

template <class F>
Moments gauss_moments(F&& f, double a, double b, double width)
{
    Moments out{};
    quad::gauss_nodes(a, b, width, [&](double s, double w) {
        const double v = w * f(s);
        const double l = s - a;
        out[0] += v;
        out[1] += v * l;
        out[2] += v * l * l;
        out[3] += v * l * l * l;
    });
    return out;
}

// ∫_lo^hi (s − a)^m c ds
inline void add_constant_piece(Moments& out, double c, double a, double lo, double hi)
{
    double plo = lo - a, phi = hi - a;
    double ql = plo, qh = phi;
    for (std::size_t m = 0; m < out.size(); ++m) {
        out[m] += c * (qh - ql) / static_cast<double>(m + 1);
        ql *= plo;
        qh *= phi;
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace detail

inline double ForcingFunction::eval(double t) const
{
    if (t < 0.0)
        return 0.0;
    return std::visit(
        detail::overloaded{
            [&](const OscGrowth& k) { return k.engine.eval(t); },
            [&](const LpMember& k) {
                switch (k.shape) {
                case LpMember::Shape::exp_decay: return std::exp(-k.parameter * t);
                case LpMember::Shape::inverse_linear: return 1.0 / (1.0 + t);
                case LpMember::Shape::power: return std::pow(1.0 + t, -k.parameter);
                }
                return 0.0;
            },
            [&](const StepTrain& k) {
                const auto& bp = k.breakpoints;
                if (t >= bp.back())
                    return t == bp.back() ? 0.5 * k.amplitudes.back() : 0.0;
                const auto it = std::upper_bound(bp.begin(), bp.end(), t);
                const auto idx = static_cast<std::size_t>(it - bp.begin()) - 1;
                if (t == bp[idx] && idx > 0)
                    return 0.5 * (k.amplitudes[idx - 1] + k.amplitudes[idx]);
                return k.amplitudes[idx];
            },
            [&](const Constant& k) { return k.c; },
            [&](const Sine& k) { return k.amplitude * std::sin(2.0 * std::numbers::pi * k.frequency * t); },
            [&](const Tabulated& k) { return k.table.at(t); },
            [&](const Sum& k) {
                double acc = 0.0;
                for (const auto& term : k.terms)
                    acc += term.weight * term.function.eval(t);
                return acc;
            },
        },
        *node_);
}

inline Moments ForcingFunction::moments(double a, double b) const
{
    if (!(b > a) || b <= 0.0)
        return Moments{};
    if (a >= 0.0)
        return moments_nonnegative(a, b);
    // zero extension: integrate over [0, b] and re-centre the weights at a
    const Moments z = moments_nonnegative(0.0, b);
    const double shift = -a; // (s - a) = s + shift
    Moments out{};
    out[0] = z[0];
    out[1] = z[1] + shift * z[0];
    out[2] = z[2] + 2.0 * shift * z[1] + shift * shift * z[0];
    out[3] = z[3] + 3.0 * shift * z[2] + 3.0 * shift * shift * z[1] + shift * shift * shift * z[0];
    return out;
}

inline Moments ForcingFunction::moments_nonnegative(double a, double b) const
{
    return std::visit(
        detail::overloaded{
            [&](const OscGrowth& k) { return k.engine.moments(a, b); },
            [&](const LpMember& k) {
                const double width = k.shape == LpMember::Shape::exp_decay ? std::min(0.5, 2.0 / k.parameter) : 0.5;
                return detail::gauss_moments([this](double s) { return eval(s); }, a, b, width);
            },
            [&](const StepTrain& k) {
                Moments out{};
                const auto& bp = k.breakpoints;
                for (std::size_t i = 0; i < k.amplitudes.size(); ++i) {
                    const double lo = std::max(a, bp[i]);
                    const double hi = std::min(b, bp[i + 1]);
                    if (hi > lo)
                        detail::add_constant_piece(out, k.amplitudes[i], a, lo, hi);
                }
                return out;
            },
            [&](const Constant& k) {
                Moments out{};
                detail::add_constant_piece(out, k.c, a, a, b);
                return out;
            },
            [&](const Sine& k) {
                return detail::gauss_moments([this](double s) { return eval(s); }, a, b, 0.25 / k.frequency);
            },
            [&](const Tabulated& k) {
                const Grid& g = k.table.grid();
                if (b > g.last_time() + 1e-9 * g.step()) {
                    std::ostringstream msg;
                    msg << "tabulated forcing integrated up to t=" << b << " beyond its horizon " << g.last_time();
                    throw DomainError(msg.str());
                }
                // exact on the piecewise-linear interpolant: integrate node to node
                Moments out{};
                const double h = g.step();
                double lo = a;
                while (lo < b) {
                    const double next_node = (std::floor(lo / h + 1e-9) + 1.0) * h;
                    const double hi = std::min(b, next_node);
                    const Moments piece = detail::gauss_moments([&](double s) { return k.table.at(s); }, lo, hi, hi - lo + 1.0);
                    const double d = lo - a; // re-centre from lo to a
                    out[0] += piece[0];
                    out[1] += piece[1] + d * piece[0];
                    out[2] += piece[2] + 2.0 * d * piece[1] + d * d * piece[0];
                    out[3] += piece[3] + 3.0 * d * piece[2] + 3.0 * d * d * piece[1] + d * d * d * piece[0];
                    lo = hi;
                }
                return out;
            },
            [&](const Sum& k) {
                Moments out{};
                for (const auto& term : k.terms) {
                    const Moments part = term.function.moments(a, b);
                    for (std::size_t m = 0; m < out.size(); ++m)
                        out[m] += term.weight * part[m];
                }
                return out;
            },
        },
        *node_);
}

inline double ForcingFunction::resolved_until(double h) const
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        detail::overloaded{
            [&](const OscGrowth& k) {
                // local angular frequency β e^{βt}; ≤ 0.2 rad per step
                const double beta = k.engine.beta();
                return std::log(0.2 / (beta * h)) / beta;
            },
            [&](const Sine& k) { return 2.0 * std::numbers::pi * k.frequency * h <= 0.2 ? inf : 0.0; },
            [&](const Sum& k) {
                double t = inf;
                for (const auto& term : k.terms)
                    t = std::min(t, term.function.resolved_until(h));
                return t;
            },
            [&](const auto&) { return inf; },
        },
        *node_);
}

inline std::string ForcingFunction::describe() const
{
    std::ostringstream out;
    std::visit(detail::overloaded{
                   [&](const OscGrowth& k) { out << "osc_growth(alpha=" << k.engine.alpha() << ", beta=" << k.engine.beta() << ")"; },
                   [&](const LpMember& k) {
                       switch (k.shape) {
                       case LpMember::Shape::exp_decay: out << "exp_decay(rate=" << k.parameter << ")"; break;
                       case LpMember::Shape::inverse_linear: out << "inverse_linear"; break;
                       case LpMember::Shape::power: out << "power(exponent=" << k.parameter << ")"; break;
                       }
                   },
                   [&](const StepTrain& k) { out << "step_train(" << k.amplitudes.size() << " steps)"; },
                   [&](const Constant& k) { out << "constant(" << k.c << ")"; },
                   [&](const Sine& k) { out << "sine(amplitude=" << k.amplitude << ", frequency=" << k.frequency << ")"; },
                   [&](const Tabulated& k) { out << "tabulated(" << k.table.size() << " nodes)"; },
                   [&](const Sum& k) {
                       out << "sum(";
                       for (std::size_t i = 0; i < k.terms.size(); ++i)
                           out << (i ? " + " : "") << k.terms[i].weight << "*" << k.terms[i].function.describe();
                       out << ")";
                   },
               },
               *node_);
    return out.str();
}

/// F(t_i; θ) = ∫_{t_i}^{t_i+θ} f(s) ds on every node of `grid`.
inline Trajectory interval_average(const ForcingFunction& f, double theta, const Grid& grid)
{
    if (!(theta > 0.0 && theta <= 1.0)) {
        std::ostringstream msg;
        msg << "interval_average: theta=" << theta << " outside (0, 1]";
        throw DomainError(msg.str());
    }
    Trajectory out(grid);
    for (std::size_t i = 0; i < grid.n_points(); ++i) {
        const double t = grid.time(i);
        out[i] = f.integral(t, t + theta);
    }
    return out;
}

/// Nodal first and second primitives G(t) = ∫_0^t f, G2(t) = ∫_0^t G, and the
/// panel moments they are built from. Off-node values are exact as well.
class PrimitiveTable {
public:
    PrimitiveTable(const ForcingFunction& f, const Grid& grid) : f_(f), grid_(grid)
    {
        const std::size_t n = grid.n_points();
        const double h = grid.step();
        panels_.resize(n - 1);
        g1_.assign(n, 0.0);
        g2_.assign(n, 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            panels_[j] = f.moments(grid.time(j), grid.time(j + 1));
            g1_[j + 1] = g1_[j] + panels_[j][0];
            g2_[j + 1] = g2_[j] + h * g1_[j] + h * panels_[j][0] - panels_[j][1];
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    const ForcingFunction& forcing() const noexcept { return f_; }
    const Moments& panel(std::size_t j) const { return panels_[j]; }
    std::span<const double> g1() const noexcept { return g1_; }
    std::span<const double> g2() const noexcept { return g2_; }

    double g1_at(double t) const
    {
        if (t <= 0.0)
            return 0.0;
        const auto [j, d] = locate(t);
        return g1_[j] + (d > 0.0 ? f_.integral(grid_.time(j), t) : 0.0);
    }

    double g2_at(double t) const
    {
        if (t <= 0.0)
            return 0.0;
        const auto [j, d] = locate(t);
        if (d <= 0.0)
            return g2_[j];
        const Moments m = f_.moments(grid_.time(j), t);
        return g2_[j] + d * g1_[j] + d * m[0] - m[1];
    }

private:
    std::pair<std::size_t, double> locate(double t) const
    {
        const double h = grid_.step();
        auto j = static_cast<std::size_t>(std::floor(t / h + 1e-9));
        j = std::min(j, grid_.n_points() - 1);
        double d = t - grid_.time(j);
        if (std::abs(d) < 1e-9 * h)
            d = 0.0;
        return {j, d};
    }

    ForcingFunction f_;
    Grid grid_;
    std::vector<Moments> panels_;
    std::vector<double> g1_;
    std::vector<double> g2_;
};

/// Zeroth and normalised first moment of g on one grid panel [a, a+h]:
/// m0 = ∫ g, m1 = ∫ ((s − a)/h) g.
struct PanelMoments {
    double m0 = 0.0;
    double m1 = 0.0;
};

struct Decomposition {
    Trajectory f1; ///< ∫_{t-1}^t f
    Trajectory f2; ///< f − f1
    Trajectory f3; ///< ∫_0^t f2
    double key1_residual = 0.0;
    double key1_window_end = 0.0; ///< residual taken over t_i ∈ [1, key1_window_end]
    std::size_t key1_points = 0;
    std::vector<PanelMoments> f1_panels;
    std::vector<PanelMoments> f3_panels;
};

/// f = f1 + f2 with f1(t) = ∫_{t−1}^t f (zero extension), f3 = ∫_0^t f2.
///
/// f1, f3 and their panel moments are exact up to rounding. key1_residual is the
/// largest gap between f3(t_i) and an independent evaluation of
/// ∫_0^1 ∫_{t_i+v−1}^{t_i} f(u) du dv (outer trapezoid in v), over the t_i ≥ 1
/// where f is resolved by the grid and t_i ≤ key1_cap.
inline Decomposition decompose(const ForcingFunction& f, const Grid& grid, const PrimitiveTable* table = nullptr,
                               double key1_cap = std::numeric_limits<double>::infinity())
{
    if (grid.horizon() < 2.0)
        throw ConfigError("decompose needs a grid horizon >= 2");
    std::unique_ptr<PrimitiveTable> own;
    if (table == nullptr || !(table->grid() == grid)) {
        own = std::make_unique<PrimitiveTable>(f, grid);
        table = own.get();
    }
    const std::size_t n = grid.n_points();
    const double h = grid.step();

    Decomposition d{Trajectory(grid), Trajectory(grid), Trajectory(grid)};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.time(i);
        d.f1[i] = f.integral(t - 1.0, t);
        d.f2[i] = f.eval(t) - d.f1[i];
    }

    d.f1_panels.resize(n - 1);
    d.f3_panels.resize(n - 1);
    const double h2 = h * h, h3 = h2 * h;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double a = grid.time(j);
        const Moments& mp = table->panel(j);
        const Moments ms = f.moments(a - 1.0, a - 1.0 + h);
        const double f1a = d.f1[j];
        // moments of f1 = G(s) - G(s-1) on [a, a+h]: ∫(s-a)^k G = [G(a)h^{k+1} + h^{k+1}M0 - M_{k+1}]/(k+1)
        const double dm0 = mp[0] - ms[0];
        const double q0 = f1a * h + h * dm0 - (mp[1] - ms[1]);
        const double q1 = (f1a * h2 + h2 * dm0 - (mp[2] - ms[2])) / 2.0;
        const double q2 = (f1a * h3 + h3 * dm0 - (mp[3] - ms[3])) / 3.0;
        d.f1_panels[j] = {q0, q1 / h};
        // f3 = G - Φ with Φ = ∫_0^s f1, so f3 has increments ∫ f - ∫ f1
        const double f3a = d.f3[j];
        const double e0 = mp[0] - q0;
        const double r0 = f3a * h + h * e0 - (mp[1] - q1);
        const double r1 = (f3a * h2 + h2 * e0 - (mp[2] - q2)) / 2.0;
        d.f3_panels[j] = {r0, r1 / h};
        d.f3[j + 1] = f3a + e0;
    }

    // independent route: outer trapezoid in v of ∫_{t+v-1}^t f = G(t) - G(t+v-1)
    const double window_end = std::min({grid.last_time(), f.resolved_until(h), key1_cap});
    d.key1_window_end = window_end;
    const double inv = 1.0 / h;
    const bool aligned = std::abs(inv - std::round(inv)) < 1e-9;
    const auto g1 = table->g1();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + g1[i];
    const std::size_t m = aligned ? static_cast<std::size_t>(std::llround(inv)) : static_cast<std::size_t>(std::ceil(inv));
    const double hv = 1.0 / static_cast<double>(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.time(i);
        if (t < 1.0 - 1e-12 || t > window_end + 1e-12)
            continue;
        double trap = 0.0; // trapezoid of G over [t-1, t]
        if (aligned && i >= m) {
            trap = h * (prefix[i + 1] - prefix[i - m] - 0.5 * (g1[i - m] + g1[i]));
        } else {
            for (std::size_t k = 0; k <= m; ++k) {
                const double w = (k == 0 || k == m) ? 0.5 * hv : hv;
                trap += w * table->g1_at(t - 1.0 + hv * static_cast<double>(k));
            }
        }
        const double nested = g1[i] - trap;
        worst = std::max(worst, std::abs(d.f3[i] - nested));
        ++d.key1_points;
    }
    d.key1_residual = worst;
    return d;
}

} // namespace volterra
