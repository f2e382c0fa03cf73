#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "volterra/errors.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

/// Weighted integrals of f(s) = e^{αs} sin(e^{βs}), 0 < α < β:
///
///     M_m(a, b) = ∫_a^b (s − a)^m f(s) ds,   m = 0..3, 0 ≤ a ≤ b.
///
/// With u = e^{βs} the integrand becomes (1/β) ℓ^m u^{α/β−1} sin u, ℓ = s − a.
/// Up to u = kSwitch the oscillation is resolved and the integral is taken by
/// Gauss–Legendre on sub-panels spanning at most one unit of u. Beyond it the
/// antiderivative is the asymptotic series
///
///     ∫ g(u) e^{iu} du = −i e^{iu} Σ_n i^n g^{(n)}(u),
///
/// truncated once terms drop below 1e-17 of the largest term; for u ≥ 40 the
/// smallest term is below e^{-40} relative, so the truncation is at rounding level.
class OscillatoryMoments {
public:
    static constexpr std::size_t kOrders = 4;
    static constexpr double kSwitch = 40.0;

    OscillatoryMoments(double alpha, double beta) : alpha_(alpha), beta_(beta), c_(alpha / beta - 1.0)
    {
        if (!(alpha > 0.0 && alpha < beta) || !std::isfinite(beta))
            throw ConfigError("osc_growth requires 0 < alpha < beta");
        s_switch_ = std::log(kSwitch) / beta;
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    double eval(double s) const { return std::exp(alpha_ * s) * std::sin(std::exp(beta_ * s)); }

    std::array<double, kOrders> moments(double a, double b) const
    {
        std::array<double, kOrders> out{};
        if (!(b > a))
            return out;
        check_range(b);
        const double mid = std::min(b, std::max(a, s_switch_));
        if (mid > a)
            add_resolved(a, mid, a, out);
        if (b > mid) {
            const auto hi = tail_antiderivative(b, b - a);
            const auto lo = tail_antiderivative(mid, mid - a);
            for (std::size_t m = 0; m < kOrders; ++m)
                out[m] += (hi[m] - lo[m]) / beta_;
        }
        return out;
    }

private:
    void check_range(double s) const
    {
        if (beta_ * s > 700.0) {
            std::ostringstream msg;
            msg << "osc_growth: e^{beta*t} overflows at t=" << s;
            throw DomainError(msg.str());
        }
    }

    // Gauss–Legendre in s over [lo, hi] ⊂ [0, s_switch], weights (s - a)^m.
    void add_resolved(double lo, double hi, double a, std::array<double, kOrders>& out) const
    {
        const double u_lo = std::exp(beta_ * lo);
        const double u_hi = std::exp(beta_ * hi);
        const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(u_hi - u_lo)));
        const double du = (u_hi - u_lo) / static_cast<double>(pieces);
        double s0 = lo;
        for (std::size_t k = 1; k <= pieces; ++k) {
            const double s1 = (k == pieces) ? hi : std::log(u_lo + du * static_cast<double>(k)) / beta_;
            quad::gauss_nodes(s0, s1, s1 - s0 + 1.0, [&](double s, double w) {
                const double fs = w * eval(s);
                const double l = s - a;
                out[0] += fs;
                out[1] += fs * l;
                out[2] += fs * l * l;
                out[3] += fs * l * l * l;
            });
            s0 = s1;
        }
    }

    // Im[−i e^{iu} Σ_n i^n g_n(u)] for g(u) = ℓ^m u^c, ℓ = s − a, u = e^{βs}; dℓ/du = 1/(βu).
    std::array<double, kOrders> tail_antiderivative(double s, double ell) const
    {
        const double u = std::exp(beta_ * s);
        const double sn = std::sin(u);
        const double cs = std::cos(u);
        std::array<double, kOrders> out{};
        for (std::size_t m = 0; m < kOrders; ++m) {
            std::array<double, kOrders> poly{}; // coefficients of ℓ^j in g_n / u^{c-n}
            poly[m] = 1.0;
            double upow = std::pow(u, c_);
            double re = 0.0, im = 0.0, largest = 0.0, previous = HUGE_VAL;
            for (std::size_t n = 0; n < 120; ++n) {
                double val = 0.0, mag = 0.0; // mag bounds |val| without cancellation in ℓ
                for (std::size_t j = m + 1; j-- > 0;) {
                    val = val * ell + poly[j];
                    mag = mag * std::abs(ell) + std::abs(poly[j]);
                }
                val *= upow;
                mag *= upow;
                if (n > m + 2 && mag > previous)
                    break; // asymptotic series started to diverge
                switch (n % 4) {
                case 0: re += val; break;
                case 1: im += val; break;
                case 2: re -= val; break;
                default: im -= val; break;
                }
                largest = std::max(largest, mag);
                if (n >= m && mag <= 1e-17 * largest)
                    break;
                previous = mag;
                const double cn = c_ - static_cast<double>(n);
                std::array<double, kOrders> next{};
                for (std::size_t j = 0; j <= m; ++j) {
                    next[j] += cn * poly[j];
                    if (j > 0)
                        next[j - 1] += static_cast<double>(j) / beta_ * poly[j];
                }
                poly = next;
                upow /= u;
            }
            out[m] = sn * im - cs * re;
        }
        return out;
    }

    double alpha_;
    double beta_;
    double c_;
    double s_switch_ = 0.0;
};

} // namespace volterra
