#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "volterra/errors.hpp"
#include "volterra/grid.hpp"
#include "volterra/measure.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

enum class L1Verdict { integrable, suspect_nonintegrable, inconclusive };

inline const char* to_string(L1Verdict v)
{
    switch (v) {
    case L1Verdict::integrable: return "integrable";
    case L1Verdict::suspect_nonintegrable: return "suspect_nonintegrable";
    case L1Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct L1Diagnostic {
    double truncated = 0.0;      ///< ∫_0^T |g|
    double half = 0.0;           ///< ∫_0^{T/2} |g|
    double increment = 0.0;      ///< (truncated - half) / half
    std::optional<double> tail_rate; ///< −slope of the log-peak fit on the final third
    L1Verdict verdict = L1Verdict::inconclusive;
};

struct ResolventResult {
    Trajectory r;
    Trajectory r_prime;
    double l1_truncated = 0.0;
    std::optional<double> l1_tail_rate;
    L1Verdict l1_verdict = L1Verdict::inconclusive;
};

inline constexpr double kDefaultTauTail = 1e-3;

/// Finite-horizon L¹ diagnostic of a sampled function: tail increment between
/// T/2 and T plus the envelope slope over the final third.
inline L1Diagnostic l1_diagnostic(const Trajectory& g, double tau_tail = kDefaultTauTail)
{
    L1Diagnostic d;
    const double T = g.grid().last_time();
    d.truncated = quad::trapezoid_power(g, 1.0, T);
    d.half = quad::trapezoid_power(g, 1.0, 0.5 * T);
    if (d.truncated == 0.0) {
        d.verdict = L1Verdict::integrable;
        return d;
    }
    d.increment = d.half > 0.0 ? (d.truncated - d.half) / d.half : HUGE_VAL;
    const auto env = quad::peak_envelope(g, 2.0 * T / 3.0, T, 8);
    if (env.all_zero) {
        d.tail_rate = HUGE_VAL;
        d.verdict = d.increment < tau_tail ? L1Verdict::integrable : L1Verdict::inconclusive;
        return d;
    }
    if (env.log_fit)
        d.tail_rate = -env.log_fit->slope;
    const bool decaying = d.tail_rate && *d.tail_rate > 0.0;
    if (d.increment < tau_tail && decaying)
        d.verdict = L1Verdict::integrable;
    else if (d.increment > 0.2 || (d.tail_rate && !decaying))
        d.verdict = L1Verdict::suspect_nonintegrable;
    else
        d.verdict = L1Verdict::inconclusive;
    return d;
}

/// Verdict on r from its truncated L¹ integrals on [0, T/2] and [0, T].
inline L1Verdict classify_l1(const ResolventResult& res, double tau_tail = kDefaultTauTail)
{
    return l1_diagnostic(res.r, tau_tail).verdict;
}

namespace detail {

inline double implicit_denominator(double h, double self_weight)
{
    const double denom = 1.0 - 0.5 * h * self_weight;
    if (std::abs(denom) < 1e-12) {
        std::ostringstream msg;
        msg << "trapezoidal step is degenerate (1 - h/2 * nu({0}) = " << denom << " at h=" << h
            << "); choose a smaller h";
        throw ConfigError(msg.str());
    }
    return denom;
}

} // namespace detail

/// r' = ν∗r, r(0) = 1, by the trapezoidal rule
/// r_{i+1} = r_i + (h/2)[(ν∗r)(t_i) + (ν∗r)(t_{i+1})], with the x_{i+1} terms
/// of (ν∗r)(t_{i+1}) moved to the left-hand side. Each panel uses one-sided
/// limits of ν∗r, which jumps where an atom switches on.
inline ResolventResult solve_resolvent(const Measure& m, const Grid& grid, double tau_tail = kDefaultTauTail)
{
    const std::size_t n = grid.n_points();
    const double h = grid.step();
    const NodeConvolver conv(m, grid);
    ResolventResult res{Trajectory(grid), Trajectory(grid)};
    auto r = res.r.values();
    r[0] = 1.0;
    double c_prev = conv.value(r, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const NodeSplit s = conv.split(r, i + 1);
        const double denom = detail::implicit_denominator(h, s.self_weight);
        r[i + 1] = (r[i] + 0.5 * h * (c_prev + s.history - conv.onset(r, i + 1))) / denom;
        c_prev = s.history + s.self_weight * r[i + 1];
    }
    auto rp = res.r_prime.values();
    for (std::size_t i = 0; i < n; ++i)
        rp[i] = conv.value(r, i);
    const auto d = l1_diagnostic(res.r, tau_tail);
    res.l1_truncated = d.truncated;
    res.l1_tail_rate = d.tail_rate;
    res.l1_verdict = d.verdict;
    return res;
}

} // namespace volterra
