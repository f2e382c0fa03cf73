#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/forcing.hpp"
#include "volterra/grid.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

enum class Membership { finite, infinite, inconclusive };

inline const char* to_string(Membership m)
{
    switch (m) {
    case Membership::finite: return "finite";
    case Membership::infinite: return "infinite";
    case Membership::inconclusive: return "inconclusive";
    }
    return "?";
}

struct Thresholds {
    double tau_growth = 1e-2; ///< relative increment from T/2 to T still counted as converged
    double tau_blow = 0.2;    ///< relative increment that counts as divergence
    double tau_tail = 1e-3;   ///< resolvent L¹ tail tolerance
    double slope_tol = 1e-4;  ///< envelope log-slopes ≥ −slope_tol count as not decaying
};

/// Tail peaks at or below this fraction of sup|x| are rounding residue; their slope says nothing.
inline constexpr double kEnvelopeNoise = 1e-12;

/// Composite trapezoid of |x|^p over [0, upper] (default: the whole grid).
inline double truncated_lp(const Trajectory& x, double p, std::optional<double> upper = std::nullopt)
{
    if (!(p >= 1.0)) {
        std::ostringstream msg;
        msg << "truncated_lp: p=" << p << " < 1";
        throw DomainError(msg.str());
    }
    return quad::trapezoid_power(x, p, upper.value_or(x.grid().last_time()));
}

struct MembershipDiagnostic {
    double lp_half = 0.0;
    double lp_full = 0.0;
    double increment = 0.0; ///< (lp_full − lp_half) / lp_half
    std::optional<double> peak_slope;
    bool stagnant = false; ///< envelope on the final third is flat or growing
    bool tail_at_rounding = false; ///< final-third peaks are rounding residue, no slope test
    Membership classification = Membership::inconclusive;
};

inline MembershipDiagnostic membership_diagnostic(const Trajectory& x, double p, const Thresholds& th = {})
{
    MembershipDiagnostic d;
    const double T = x.grid().last_time();
    d.lp_full = truncated_lp(x, p, T);
    d.lp_half = truncated_lp(x, p, 0.5 * T);
    if (d.lp_full == 0.0) {
        d.classification = Membership::finite;
        return d;
    }
    d.increment = d.lp_half > 0.0 ? (d.lp_full - d.lp_half) / d.lp_half : HUGE_VAL;
    const auto env = quad::peak_envelope(x, 2.0 * T / 3.0, T, 8);
    const double tail_peak = env.peaks.empty() ? 0.0 : *std::max_element(env.peaks.begin(), env.peaks.end());
    d.tail_at_rounding = tail_peak <= kEnvelopeNoise * sup_norm(x);
    if (!env.all_zero && env.log_fit) {
        d.peak_slope = env.log_fit->slope;
        d.stagnant = !d.tail_at_rounding && *d.peak_slope >= -th.slope_tol;
    }
    if (d.increment <= th.tau_growth && !d.stagnant)
        d.classification = Membership::finite;
    else if (d.increment > th.tau_blow || d.stagnant)
        d.classification = Membership::infinite;
    else
        d.classification = Membership::inconclusive;
    return d;
}

/// Finite-horizon verdict on x ∈ L^p(ℝ₊).
inline Membership classify_membership(const Trajectory& x, double p, const Thresholds& th = {})
{
    return membership_diagnostic(x, p, th).classification;
}

struct NormReport {
    double p = 1.0;
    std::vector<double> theta_grid;
    std::vector<double> phi;      ///< ∫_0^{T−θ} |F(t;θ)|^p
    std::vector<double> phi_half; ///< ∫_0^{(T−θ)/2} |F(t;θ)|^p
    std::vector<double> half_horizon_ratio;
    std::vector<Membership> per_theta;
    double sup_phi = 0.0;
    Membership classification = Membership::inconclusive;
};

/// k/n for k = 1..n
inline std::vector<double> uniform_theta_grid(std::size_t n = 16)
{
    std::vector<double> out(n);
    for (std::size_t k = 1; k <= n; ++k)
        out[k - 1] = static_cast<double>(k) / static_cast<double>(n);
    return out;
}

/// φ(θ) over the θ-grid and the finite/infinite verdict on the interval averages of f.
/// A θ whose F(·;θ) vanishes to rounding relative to the largest F on the grid
/// counts as finite with ratio 1.
inline NormReport condition_A_report(const ForcingFunction& f, double p, const Grid& grid,
                                     std::span<const double> theta_grid, const Thresholds& th = {})
{
    if (theta_grid.empty())
        throw ConfigError("condition_A_report: empty theta grid");
    if (!(p >= 1.0)) {
        std::ostringstream msg;
        msg << "condition_A_report: p=" << p << " < 1";
        throw DomainError(msg.str());
    }
    if (grid.horizon() < 4.0)
        throw ConfigError("condition_A_report needs a grid horizon >= 4");
    NormReport rep;
    rep.p = p;
    rep.theta_grid.assign(theta_grid.begin(), theta_grid.end());
    const std::size_t m = theta_grid.size();
    rep.phi.resize(m);
    rep.phi_half.resize(m);
    rep.half_horizon_ratio.resize(m);
    rep.per_theta.resize(m);
    std::vector<double> sup(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double theta = theta_grid[k];
        const double upper = grid.last_time() - theta;
        const Trajectory F = interval_average(f, theta, grid.truncated(upper));
        rep.phi[k] = quad::trapezoid_power(F, p, upper);
        rep.phi_half[k] = quad::trapezoid_power(F, p, 0.5 * upper);
        sup[k] = sup_norm(F);
    }
    const double scale = *std::max_element(sup.begin(), sup.end());
    bool any_infinite = false, all_finite = true;
    for (std::size_t k = 0; k < m; ++k) {
        if (sup[k] <= 1e-12 * scale || rep.phi[k] == 0.0) {
            rep.half_horizon_ratio[k] = 1.0;
            rep.per_theta[k] = Membership::finite;
        } else {
            const double ratio = rep.phi_half[k] > 0.0 ? rep.phi[k] / rep.phi_half[k] : HUGE_VAL;
            rep.half_horizon_ratio[k] = ratio;
            if (ratio <= 1.0 + th.tau_growth)
                rep.per_theta[k] = Membership::finite;
            else if (ratio > 1.0 + th.tau_blow)
                rep.per_theta[k] = Membership::infinite;
            else
                rep.per_theta[k] = Membership::inconclusive;
        }
        any_infinite = any_infinite || rep.per_theta[k] == Membership::infinite;
        all_finite = all_finite && rep.per_theta[k] == Membership::finite;
    }
    rep.sup_phi = *std::max_element(rep.phi.begin(), rep.phi.end());
    rep.classification = any_infinite ? Membership::infinite
                                      : (all_finite ? Membership::finite : Membership::inconclusive);
    return rep;
}

} // namespace volterra
