#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/forcing.hpp"
#include "volterra/grid.hpp"
#include "volterra/measure.hpp"
#include "volterra/quadrature.hpp"
#include "volterra/resolvent.hpp"

namespace volterra {

struct SolveConfig {
    Measure measure;
    ForcingFunction forcing;
    double xi = 0.0;
    Grid grid;

    SolveConfig(Measure m, ForcingFunction f, double xi_, Grid g)
        : measure(std::move(m)), forcing(std::move(f)), xi(xi_), grid(g)
    {
        if (grid.horizon() < 2.0)
            throw ConfigError("solve config needs a grid horizon >= 2");
        if (!std::isfinite(xi))
            throw ConfigError("initial value must be finite");
    }
};

struct SolutionBundle {
    Trajectory x_direct;
    Trajectory x_voc;
    Trajectory x_key2;
    double agreement_direct_voc = 0.0;
    double agreement_voc_key2 = 0.0;
    double agreement_direct_key2 = 0.0;
};

/// W(t) = (ν∗G2)(t) with G2 the second primitive of f. Its increments are the
/// exact integrals ∫(ν∗G)(s)ds of the forcing's memory term. Atoms use exact G2
/// values; the density part is a trapezoid in s on nodal G2.
class ForcingMemory {
public:
    ForcingMemory(const Measure& m, const PrimitiveTable& table, const NodeConvolver& conv)
        : measure_(m), table_(&table), values_(table.grid().n_points()), density_(table.grid().n_points())
    {
        const Grid& g = table.grid();
        const auto g2 = table.g2();
        for (std::size_t i = 0; i < g.n_points(); ++i) {
            density_[i] = conv.density_value(g2, i);
            values_[i] = density_[i] + atoms_at(g.time(i));
        }
    }

    double operator[](std::size_t i) const { return values_[i]; }

    /// Off-node value: exact atoms, density part interpolated linearly between nodes.
    double at(double t) const
    {
        const Grid& g = table_->grid();
        const double q = t / g.step();
        auto j = static_cast<std::size_t>(std::floor(q + 1e-9));
        if (j >= g.n_points() - 1)
            return density_.back() + atoms_at(t);
        double w = q - static_cast<double>(j);
        if (w < 1e-9)
            w = 0.0;
        return (1.0 - w) * density_[j] + w * density_[j + 1] + atoms_at(t);
    }

private:
    double atoms_at(double t) const
    {
        double acc = 0.0;
        for (const auto& a : measure_.atoms()) {
            if (a.location > t)
                break;
            acc += a.weight * table_->g2_at(t - a.location);
        }
        return acc;
    }

    const Measure& measure_;
    const PrimitiveTable* table_;
    std::vector<double> values_;
    std::vector<double> density_;
};

namespace detail {

/// Σ over panels j < i of ∫_{t_j}^{t_{j+1}} K(t_i − s) g(s) ds with K linear on
/// each panel: left limits `minus`, right limits `plus` (equal unless K jumps at a node).
inline std::vector<double> product_convolution(std::span<const double> minus, std::span<const double> plus,
                                               std::span<const PanelMoments> g)
{
    const std::size_t n = minus.size();
    std::vector<double> out(n, 0.0);
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        a[j] = g[j].m0 - g[j].m1;
        b[j] = g[j].m1;
    }
    for (std::size_t i = 1; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < i; ++j)
            acc += minus[i - j] * a[j] + plus[i - j - 1] * b[j];
        out[i] = acc;
    }
    return out;
}

inline std::vector<PanelMoments> forcing_panels(const PrimitiveTable& table)
{
    const double h = table.grid().step();
    std::vector<PanelMoments> out(table.grid().n_points() - 1);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = {table.panel(j)[0], table.panel(j)[1] / h};
    return out;
}

/// Left limits of r' at nodes that carry an atom (r' jumps by w·r(0) = w there).
inline std::vector<double> derivative_left_limits(const Measure& m, const Trajectory& r_prime)
{
    std::vector<double> minus(r_prime.values().begin(), r_prime.values().end());
    const Grid& g = r_prime.grid();
    for (const auto& a : m.atoms()) {
        if (a.location <= 0.0)
            continue;
        const auto k = g.node_index(a.location);
        if (k > 0)
            minus[static_cast<std::size_t>(k)] -= a.weight;
    }
    return minus;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b)) {
        std::ostringstream msg;
        msg << what << ": grid mismatch (h=" << a.step() << ", n=" << a.n_points() << " vs h=" << b.step()
            << ", n=" << b.n_points() << ")";
        throw ConfigError(msg.str());
    }
}

} // namespace detail

/// Trapezoidal stepping of x' = ν∗x + f, x(0) = ξ. The scheme marches
/// y = x − G (G = ∫_0^t f) with y' = ν∗y + ν∗G; the trapezoid is applied to
/// ν∗y while ∫(ν∗G) is taken exactly from the second primitive of f.
inline Trajectory solve_direct(const SolveConfig& cfg, const PrimitiveTable* table = nullptr)
{
    const Grid& grid = cfg.grid;
    std::unique_ptr<PrimitiveTable> own;
    if (table == nullptr) {
        own = std::make_unique<PrimitiveTable>(cfg.forcing, grid);
        table = own.get();
    }
    detail::require_same_grid(table->grid(), grid, "solve_direct");
    const NodeConvolver conv(cfg.measure, grid);
    const ForcingMemory memory(cfg.measure, *table, conv);
    const std::size_t n = grid.n_points();
    const double h = grid.step();
    std::vector<double> y(n, 0.0);
    y[0] = cfg.xi;
    double c_prev = conv.value(y, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const NodeSplit s = conv.split(y, i + 1);
        const double denom = detail::implicit_denominator(h, s.self_weight);
        y[i + 1] = (y[i] + 0.5 * h * (c_prev + s.history - conv.onset(y, i + 1)) + memory[i + 1] - memory[i]) / denom;
        c_prev = s.history + s.self_weight * y[i + 1];
    }
    const auto g1 = table->g1();
    for (std::size_t i = 0; i < n; ++i)
        y[i] += g1[i];
    return Trajectory(grid, std::move(y));
}

/// x(t_i) = r(t_i)ξ + ∫_0^{t_i} r(t_i − s) f(s) ds, with r linear on each panel
/// and integrated against the exact panel moments of f.
inline Trajectory solve_voc(const SolveConfig& cfg, const ResolventResult& res, const PrimitiveTable* table = nullptr)
{
    detail::require_same_grid(res.r.grid(), cfg.grid, "solve_voc");
    std::unique_ptr<PrimitiveTable> own;
    if (table == nullptr) {
        own = std::make_unique<PrimitiveTable>(cfg.forcing, cfg.grid);
        table = own.get();
    }
    detail::require_same_grid(table->grid(), cfg.grid, "solve_voc");
    const auto r = res.r.values();
    const auto panels = detail::forcing_panels(*table);
    auto x = detail::product_convolution(r, r, panels);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += r[i] * cfg.xi;
    return Trajectory(cfg.grid, std::move(x));
}

/// r(t)ξ + (r∗f1)(t) + f3(t) + (r'∗f3)(t).
inline Trajectory reconstruct_key2(const Decomposition& dec, const ResolventResult& res, const SolveConfig& cfg)
{
    detail::require_same_grid(dec.f1.grid(), cfg.grid, "reconstruct_key2");
    detail::require_same_grid(res.r.grid(), cfg.grid, "reconstruct_key2");
    const auto r = res.r.values();
    const auto rp_minus = detail::derivative_left_limits(cfg.measure, res.r_prime);
    const auto part1 = detail::product_convolution(r, r, dec.f1_panels);
    const auto part3 = detail::product_convolution(rp_minus, res.r_prime.values(), dec.f3_panels);
    std::vector<double> x(r.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = r[i] * cfg.xi + part1[i] + dec.f3[i] + part3[i];
    return Trajectory(cfg.grid, std::move(x));
}

/// t_i ↦ x(t_i+θ) − x(t_i) − ∫_{t_i}^{t_i+θ}(ν∗x)(s) ds on the nodes t_i ≤ T − θ,
/// for every θ in `thetas`. With y = x − G the memory integral is a cumulative
/// trapezoid of ν∗y plus the exact increment of ν∗G2; off-node values of x are
/// interpolated through y.
inline std::vector<Trajectory> integrated_residuals(const Trajectory& x, const SolveConfig& cfg,
                                                    std::span<const double> thetas,
                                                    const PrimitiveTable* table = nullptr)
{
    for (double theta : thetas) {
        if (!(theta > 0.0 && theta <= 1.0)) {
            std::ostringstream msg;
            msg << "integrated_residual: theta=" << theta << " outside (0, 1]";
            throw DomainError(msg.str());
        }
    }
    detail::require_same_grid(x.grid(), cfg.grid, "integrated_residual");
    std::unique_ptr<PrimitiveTable> own;
    if (table == nullptr) {
        own = std::make_unique<PrimitiveTable>(cfg.forcing, cfg.grid);
        table = own.get();
    }
    const Grid& grid = cfg.grid;
    const std::size_t n = grid.n_points();
    const double h = grid.step();
    const NodeConvolver conv(cfg.measure, grid);
    const ForcingMemory memory(cfg.measure, *table, conv);
    const auto g1 = table->g1();
    std::vector<double> y(n), cum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = x[i] - g1[i];
    double c_prev = conv.value(y, 0);
    for (std::size_t i = 1; i < n; ++i) {
        const double c = conv.value(y, i);
        cum[i] = cum[i - 1] + 0.5 * h * (c_prev + c - conv.onset(y, i));
        c_prev = c;
    }
    const Trajectory cumulative(grid, std::move(cum));
    const Trajectory smooth(grid, std::move(y));

    std::vector<Trajectory> out;
    out.reserve(thetas.size());
    for (double theta : thetas) {
        const Grid out_grid = grid.truncated(grid.last_time() - theta);
        Trajectory res(out_grid);
        for (std::size_t i = 0; i < out_grid.n_points(); ++i) {
            const double u = grid.time(i) + theta;
            const double memory_integral = cumulative.at(u) - cumulative[i] + memory.at(u) - memory[i];
            // off-node x(u): interpolate the smooth part only, G is exact
            const double xu = smooth.at(u) + table->g1_at(u);
            res[i] = xu - x[i] - memory_integral;
        }
        out.push_back(std::move(res));
    }
    return out;
}

inline Trajectory integrated_residual(const Trajectory& x, const SolveConfig& cfg, double theta,
                                      const PrimitiveTable* table = nullptr)
{
    const double thetas[] = {theta};
    return std::move(integrated_residuals(x, cfg, thetas, table).front());
}

/// ξ-independent parts of every solution path for one (ν, f, grid). Each
/// path is affine in ξ with slope r, so per-ξ bundles are assembled cheaply.
struct ForcedSolution {
    ResolventResult resolvent;
    std::shared_ptr<const PrimitiveTable> table;
    Decomposition decomposition;
    Trajectory direct;
    Trajectory voc;
    Trajectory key2;

    SolutionBundle bundle(double xi) const
    {
        auto shift = [&](const Trajectory& base) {
            Trajectory x = base;
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += xi * resolvent.r[i];
            return x;
        };
        SolutionBundle b{shift(direct), shift(voc), shift(key2)};
        b.agreement_direct_voc = sup_distance(b.x_direct, b.x_voc);
        b.agreement_voc_key2 = sup_distance(b.x_voc, b.x_key2);
        b.agreement_direct_key2 = sup_distance(b.x_direct, b.x_key2);
        return b;
    }
};

inline ForcedSolution solve_forced(const Measure& m, const ForcingFunction& f, const Grid& grid,
                                   double tau_tail = kDefaultTauTail,
                                   double key1_cap = std::numeric_limits<double>::infinity(),
                                   const ResolventResult* resolvent = nullptr)
{
    const SolveConfig cfg(m, f, 0.0, grid);
    if (resolvent != nullptr)
        detail::require_same_grid(resolvent->r.grid(), grid, "solve_forced");
    auto res = resolvent != nullptr ? *resolvent : solve_resolvent(m, grid, tau_tail);
    auto table = std::make_shared<const PrimitiveTable>(f, grid);
    auto dec = decompose(f, grid, table.get(), key1_cap);
    auto direct = solve_direct(cfg, table.get());
    auto voc = solve_voc(cfg, res, table.get());
    auto key2 = reconstruct_key2(dec, res, cfg);
    return ForcedSolution{std::move(res), std::move(table), std::move(dec), std::move(direct), std::move(voc),
                          std::move(key2)};
}

/// All three solution paths for one configuration.
inline SolutionBundle solve_all(const SolveConfig& cfg)
{
    return solve_forced(cfg.measure, cfg.forcing, cfg.grid).bundle(cfg.xi);
}

} // namespace volterra
