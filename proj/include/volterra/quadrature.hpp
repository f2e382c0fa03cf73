#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "volterra/grid.hpp"

namespace volterra::quad {

inline constexpr int kGaussPoints = 20;
using Gauss = boost::math::quadrature::gauss<double, kGaussPoints>;

/// Calls visit(x, w) for the Gauss–Legendre nodes of [a, b] split into
/// ceil((b-a)/max_width) equal sub-panels.
template <class Visit>
void gauss_nodes(double a, double b, double max_width, Visit&& visit)
{
    if (!(b > a))
        return;
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_width - 1e-12)));
    const double width = (b - a) / static_cast<double>(panels);
    const auto& abscissa = Gauss::abscissa();
    const auto& weights = Gauss::weights();
    // boost stores the non-negative half of the symmetric rule
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + width * static_cast<double>(p);
        const double mid = lo + 0.5 * width;
        const double half = 0.5 * width;
        for (std::size_t k = 0; k < abscissa.size(); ++k) {
            const double x = abscissa[k];
            const double w = weights[k] * half;
            if (x == 0.0) {
                visit(mid, w);
            } else {
                visit(mid - half * x, w);
                visit(mid + half * x, w);
            }
        }
    }
}

template <class F>
double gauss(F&& f, double a, double b, double max_width)
{
    double acc = 0.0;
    gauss_nodes(a, b, max_width, [&](double x, double w) { acc += w * f(x); });
    return acc;
}

/// Composite trapezoid of |x|^p over [0, upper], upper ≤ last node; the last
/// partial panel uses the interpolated endpoint.
inline double trapezoid_power(const Trajectory& x, double p, double upper)
{
    const Grid& g = x.grid();
    const double h = g.step();
    upper = std::min(upper, g.last_time());
    if (upper <= 0.0)
        return 0.0;
    auto pw = [p](double v) { return p == 1.0 ? std::abs(v) : std::pow(std::abs(v), p); };
    const auto full = static_cast<std::size_t>(std::floor(upper / h + 1e-9));
    double acc = 0.0;
    for (std::size_t i = 0; i < full; ++i)
        acc += 0.5 * h * (pw(x[i]) + pw(x[i + 1]));
    const double rest = upper - static_cast<double>(full) * h;
    if (rest > 1e-12 * h && full + 1 < x.size())
        acc += 0.5 * rest * (pw(x[full]) + pw(x.at(upper)));
    return acc;
}

/// Cumulative trapezoid C_i = ∫_0^{t_i} of the sampled values.
inline std::vector<double> cumulative_trapezoid(std::span<const double> v, double h)
{
    std::vector<double> c(v.size(), 0.0);
    for (std::size_t i = 1; i < v.size(); ++i)
        c[i] = c[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
    return c;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline std::optional<LineFit> least_squares(std::span<const double> xs, std::span<const double> ys)
{
    const auto n = xs.size();
    if (n < 2 || ys.size() != n)
        return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0)
        return std::nullopt;
    return LineFit{sxy / sxx, my - sxy / sxx * mx};
}

struct EnvelopeFit {
    std::vector<double> centers;
    std::vector<double> peaks;
    std::optional<LineFit> log_fit; ///< fit of log(peak) over windows with peak > 0
    bool all_zero = false;
};

/// Splits [t0, t1] into `windows` equal windows, takes max|x| in each, and fits
/// log(max) linearly against the window centre. The slope estimates the
/// exponential rate of the envelope.
inline EnvelopeFit peak_envelope(const Trajectory& x, double t0, double t1, std::size_t windows)
{
    EnvelopeFit out;
    const Grid& g = x.grid();
    t1 = std::min(t1, g.last_time());
    if (!(t1 > t0) || windows == 0)
        return out;
    const double width = (t1 - t0) / static_cast<double>(windows);
    std::vector<double> xs, ys;
    bool any = false;
    for (std::size_t w = 0; w < windows; ++w) {
        const double lo = t0 + width * static_cast<double>(w);
        const double hi = lo + width;
        const auto i0 = static_cast<std::size_t>(std::ceil(lo / g.step() - 1e-9));
        const auto i1 = std::min(x.size() - 1, static_cast<std::size_t>(std::floor(hi / g.step() + 1e-9)));
        double peak = 0.0;
        for (std::size_t i = i0; i <= i1; ++i)
            peak = std::max(peak, std::abs(x[i]));
        out.centers.push_back(0.5 * (lo + hi));
        out.peaks.push_back(peak);
        if (peak > std::numeric_limits<double>::min()) {
            any = true;
            xs.push_back(0.5 * (lo + hi));
            ys.push_back(std::log(peak));
        }
    }
    out.all_zero = !any;
    out.log_fit = least_squares(xs, ys);
    return out;
}

} // namespace volterra::quad
