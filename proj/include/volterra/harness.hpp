#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/forcing.hpp"
#include "volterra/norms.hpp"
#include "volterra/report.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/solver.hpp"

namespace volterra {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

/// CLI / suite exit status.
inline int exit_code(Verdict v)
{
    switch (v) {
    case Verdict::pass: return 0;
    case Verdict::fail: return 1;
    case Verdict::inconclusive: return 2;
    }
    return 1;
}
inline constexpr int kExitConfigError = 3;

/// Second-order acceptance band for error(2h)/error(h).
inline constexpr double kOrderLow = 3.4;
inline constexpr double kOrderHigh = 4.6;
/// Differences at or below kRoundingFloor·max(1, scale) are rounding, not discretisation error.
inline constexpr double kRoundingFloor = 1e-9;
/// θ values at which the integrated equation is checked.
inline constexpr double kResidualThetas[] = {0.1, 0.25, 0.5, 1.0};

struct ConvergenceCheck {
    std::string name;
    double coarse = 0.0; ///< at step 2h
    double fine = 0.0;   ///< at step h
    double ratio = 0.0;  ///< coarse / fine
    double floor = 0.0;
    bool at_floor = false;
    bool pass = false;
};

/// Passes when coarse/fine is in the second-order band, or both are rounding-level.
inline ConvergenceCheck order_check(std::string name, double coarse, double fine, double scale)
{
    ConvergenceCheck c{std::move(name), coarse, fine};
    c.floor = kRoundingFloor * std::max(1.0, scale);
    c.ratio = fine > 0.0 ? coarse / fine : HUGE_VAL;
    c.at_floor = coarse <= c.floor && fine <= c.floor;
    c.pass = c.at_floor || (c.ratio >= kOrderLow && c.ratio <= kOrderHigh);
    return c;
}

/// Passes when the fine error is below the tolerance calibrated from the coarse
/// run under second-order convergence, coarse/kOrderLow, or is rounding-level.
inline ConvergenceCheck tolerance_check(std::string name, double coarse, double fine, double scale)
{
    ConvergenceCheck c{std::move(name), coarse, fine};
    c.floor = kRoundingFloor * std::max(1.0, scale);
    c.ratio = fine > 0.0 ? coarse / fine : HUGE_VAL;
    c.at_floor = fine <= c.floor;
    c.pass = c.at_floor || fine <= coarse / kOrderLow;
    return c;
}

struct Expected {
    Membership A = Membership::finite;
    Membership B = Membership::finite;
};

struct CaseSpec {
    std::string name;
    Measure measure;
    ForcingFunction forcing;
    std::vector<double> xi_list;
    double p = 2.0;
    Grid grid;
    std::vector<double> theta_grid = uniform_theta_grid();
    std::optional<Expected> expected;
    Thresholds thresholds;
    std::optional<double> resolvent_horizon; ///< longer horizon for the L¹ gate on r
};

struct XiOutcome {
    double xi = 0.0;
    MembershipDiagnostic B;
    double agreement_direct_voc = 0.0;
    double agreement_voc_key2 = 0.0;
    double agreement_direct_key2 = 0.0;
};

struct CaseResult {
    std::string name;
    std::string measure_text;
    std::string forcing_text;
    double p = 0.0;
    double h = 0.0;
    double T = 0.0;
    L1Diagnostic resolvent;
    std::optional<Expected> expected;
    NormReport norms;
    Membership observed_A = Membership::inconclusive;
    double sup_phi_refined = 0.0;
    double sup_phi_change = 0.0; ///< relative change of sup φ when the θ-grid density doubles
    std::vector<XiOutcome> per_xi;
    Membership f1_class = Membership::inconclusive;
    Membership f3_class = Membership::inconclusive;
    double key1_residual = 0.0;
    double key1_window_end = 0.0;
    std::size_t key1_points = 0;
    std::vector<ConvergenceCheck> agreement_checks;
    std::optional<ConvergenceCheck> key1_check;
    std::vector<ConvergenceCheck> residual_checks;
    Verdict verdict = Verdict::inconclusive;
    std::string message;

    bool checks_pass() const
    {
        auto ok = [](const ConvergenceCheck& c) { return c.pass; };
        return std::all_of(agreement_checks.begin(), agreement_checks.end(), ok) &&
               std::all_of(residual_checks.begin(), residual_checks.end(), ok) && (!key1_check || key1_check->pass);
    }
    bool equivalence_holds() const
    {
        return std::all_of(per_xi.begin(), per_xi.end(),
                           [&](const XiOutcome& o) { return o.B.classification == observed_A; });
    }
    bool conclusive() const
    {
        return observed_A != Membership::inconclusive &&
               std::all_of(per_xi.begin(), per_xi.end(),
                           [](const XiOutcome& o) { return o.B.classification != Membership::inconclusive; });
    }
};

/// θ-grid with twice the density: midpoints inserted, including one between 0 and the smallest θ.
inline std::vector<double> refine_theta_grid(std::vector<double> thetas)
{
    std::sort(thetas.begin(), thetas.end());
    std::vector<double> out;
    double prev = 0.0;
    for (double t : thetas) {
        out.push_back(0.5 * (prev + t));
        out.push_back(t);
        prev = t;
    }
    return out;
}

inline CaseSpec parse_case(const config::json& j, std::optional<std::string> where = std::nullopt)
{
    namespace d = config::detail;
    const std::string ctx = where.value_or("case");
    CaseSpec spec{
        j.contains("name") ? d::text(j, "name", ctx) : std::string("case"),
        config::parse_measure(d::field(j, "measure", ctx), ctx + ".measure"),
        config::parse_forcing(d::field(j, "forcing", ctx), ctx + ".forcing"),
        {},
        d::number_or(j, "p", 2.0, ctx),
        config::parse_grid(d::field(j, "grid", ctx), ctx + ".grid"),
    };
    if (j.contains("xi_list"))
        spec.xi_list = d::numbers(j, "xi_list", ctx);
    else if (j.contains("xi"))
        spec.xi_list = {d::number(j, "xi", ctx)};
    else
        spec.xi_list = {0.0, 1.0, 10.0};
    if (spec.xi_list.empty())
        d::fail(ctx + ".xi_list", "must not be empty");
    if (!(spec.p >= 1.0))
        d::fail(ctx + ".p", "must be >= 1");
    if (j.contains("theta_grid")) {
        spec.theta_grid = d::numbers(j, "theta_grid", ctx);
        if (spec.theta_grid.empty())
            d::fail(ctx + ".theta_grid", "must not be empty");
        for (double t : spec.theta_grid)
            if (!(t > 0.0 && t <= 1.0))
                d::fail(ctx + ".theta_grid", "values must lie in (0, 1]");
    }
    if (j.contains("expected")) {
        const auto& e = j.at("expected");
        const auto a = config::parse_membership(d::text(e, "A", ctx + ".expected"), ctx + ".expected.A");
        const auto b = config::parse_membership(d::text(e, "B", ctx + ".expected"), ctx + ".expected.B");
        if (a != b)
            d::fail(ctx + ".expected", "A and B must agree");
        spec.expected = Expected{a, b};
    }
    if (j.contains("resolvent_horizon")) {
        spec.resolvent_horizon = d::number(j, "resolvent_horizon", ctx);
        if (!(*spec.resolvent_horizon >= spec.grid.horizon()))
            d::fail(ctx + ".resolvent_horizon", "must be >= grid.T");
    }
    if (j.contains("thresholds"))
        spec.thresholds = config::parse_thresholds(j.at("thresholds"), ctx + ".thresholds");
    return spec;
}

inline std::vector<CaseSpec> parse_suite(const config::json& j)
{
    const auto& cases = config::detail::field(j, "cases", "suite");
    if (!cases.is_array())
        config::detail::fail("suite.cases", "expected an array");
    if (cases.empty())
        throw ConfigError("suite.cases: empty suite");
    std::vector<CaseSpec> out;
    for (std::size_t k = 0; k < cases.size(); ++k)
        out.push_back(parse_case(cases[k], "suite.cases[" + std::to_string(k) + "]"));
    return out;
}

inline std::string describe(const Measure& m)
{
    std::ostringstream out;
    bool first = true;
    for (const auto& a : m.atoms()) {
        out << (first ? "" : " + ") << a.weight << "*delta(" << a.location << ")";
        first = false;
    }
    if (const auto& d = m.density()) {
        out << (first ? "" : " + ") << d->name() << " density on [0," << d->s_max() << "]";
        first = false;
    }
    if (first)
        out << "0";
    return out.str();
}

/// Resolvent on the case grid; the L¹ diagnostic runs on resolvent_horizon when
/// that is longer. The march is causal, so the case grid values are a prefix.
inline ResolventResult gated_resolvent(const CaseSpec& spec, L1Diagnostic& diagnostic)
{
    const auto& th = spec.thresholds;
    if (!spec.resolvent_horizon || *spec.resolvent_horizon <= spec.grid.horizon()) {
        auto res = solve_resolvent(spec.measure, spec.grid, th.tau_tail);
        diagnostic = l1_diagnostic(res.r, th.tau_tail);
        return res;
    }
    const auto long_run = solve_resolvent(spec.measure, Grid(spec.grid.step(), *spec.resolvent_horizon), th.tau_tail);
    diagnostic = l1_diagnostic(long_run.r, th.tau_tail);
    const std::size_t n = spec.grid.n_points();
    auto prefix = [n](const Trajectory& x) {
        return std::vector<double>(x.values().begin(), x.values().begin() + static_cast<std::ptrdiff_t>(n));
    };
    ResolventResult res{Trajectory(spec.grid, prefix(long_run.r)), Trajectory(spec.grid, prefix(long_run.r_prime))};
    const auto local = l1_diagnostic(res.r, th.tau_tail);
    res.l1_truncated = local.truncated;
    res.l1_tail_rate = local.tail_rate;
    res.l1_verdict = local.verdict;
    return res;
}

namespace detail {

inline double sup_residual_error(const std::vector<Trajectory>& residuals, const std::vector<Trajectory>& averages,
                                 std::size_t k)
{
    return sup_distance(residuals[k], averages[k]);
}

inline void write_case_artifacts(const std::filesystem::path& dir, const CaseSpec& spec, const ResolventResult& res,
                                 const ForcedSolution* fs, const CaseResult& out)
{
    const auto t = report::times(spec.grid);
    report::write_csv(dir / "resolvent.csv", {{"t", t}, {"r", res.r.values()}, {"r_prime", res.r_prime.values()}});
    report::write_svg(dir / "resolvent.svg", spec.name + ": resolvent",
                      {{"r", t, res.r.values()}, {"r'", t, res.r_prime.values()}});
    if (fs == nullptr)
        return;
    std::vector<report::Series> sol;
    std::vector<std::vector<double>> keep;
    keep.reserve(spec.xi_list.size() * 3);
    for (std::size_t k = 0; k < spec.xi_list.size(); ++k) {
        const auto b = fs->bundle(spec.xi_list[k]);
        for (const auto* x : {&b.x_direct, &b.x_voc, &b.x_key2})
            keep.emplace_back(x->values().begin(), x->values().end());
        const auto n = keep.size();
        report::write_csv(dir / ("solution_xi" + std::to_string(k) + ".csv"),
                          {{"t", t}, {"x_direct", keep[n - 3]}, {"x_voc", keep[n - 2]}, {"x_key2", keep[n - 1]}});
        sol.push_back({"xi=" + report::fmt(spec.xi_list[k]), t, keep[n - 3]});
    }
    report::write_svg(dir / "solution.svg", spec.name + ": x(t)", sol);
    const auto& dec = fs->decomposition;
    std::vector<double> fv(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        fv[i] = spec.forcing.eval(t[i]);
    report::write_csv(dir / "decomposition.csv", {{"t", t},
                                                  {"f", fv},
                                                  {"f1", dec.f1.values()},
                                                  {"f2", dec.f2.values()},
                                                  {"f3", dec.f3.values()}});
    report::write_svg(dir / "decomposition.svg", spec.name + ": f1, f3",
                      {{"f1", t, dec.f1.values()}, {"f3", t, dec.f3.values()}});
    const auto& nr = out.norms;
    report::write_csv(dir / "norms.csv", {{"theta", nr.theta_grid},
                                          {"phi_halfT", nr.phi_half},
                                          {"phi_T", nr.phi},
                                          {"ratio", nr.half_horizon_ratio}});
    report::write_svg(dir / "norms.svg", spec.name + ": phi(theta)",
                      {{"phi_T", nr.theta_grid, nr.phi}, {"phi_T/2", nr.theta_grid, nr.phi_half}});
}

template <class Fn>
auto with_case_name(const std::string& name, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("case '" + name + "': " + e.what());
    } catch (const DomainError& e) {
        throw DomainError("case '" + name + "': " + e.what());
    } catch (const report::IoError& e) {
        throw report::IoError("case '" + name + "': " + e.what());
    } catch (const std::exception& e) {
        throw EvaluationError("case '" + name + "': " + e.what());
    }
}

} // namespace detail

/// resolvent → forced solutions (at h and at 2h) → decomposition → interval-average
/// norms → membership of x for every ξ, plus the refinement checks of every identity.
inline CaseResult run_case(const CaseSpec& spec, std::optional<std::filesystem::path> out_dir = std::nullopt)
{
    return detail::with_case_name(spec.name, [&] {
        CaseResult out;
        out.name = spec.name;
        out.measure_text = describe(spec.measure);
        out.forcing_text = spec.forcing.describe();
        out.p = spec.p;
        out.h = spec.grid.step();
        out.T = spec.grid.last_time();
        out.expected = spec.expected;
        const auto& th = spec.thresholds;

        const auto res = gated_resolvent(spec, out.resolvent);
        if (out.resolvent.verdict != L1Verdict::integrable) {
            out.verdict = Verdict::inconclusive;
            out.message = std::string("resolvent is not integrable on this horizon (") + to_string(out.resolvent.verdict) +
                          "); the solution/forcing equivalence needs r in L1, case aborted";
            if (out_dir)
                detail::write_case_artifacts(*out_dir / spec.name, spec, res, nullptr, out);
            return out;
        }

        const Grid coarse_grid(2.0 * spec.grid.step(), spec.grid.horizon());
        const auto coarse = solve_forced(spec.measure, spec.forcing, coarse_grid, th.tau_tail);
        const auto fine = solve_forced(spec.measure, spec.forcing, spec.grid, th.tau_tail,
                                       coarse.decomposition.key1_window_end, &res);

        out.norms = condition_A_report(spec.forcing, spec.p, spec.grid, spec.theta_grid, th);
        out.observed_A = out.norms.classification;
        const auto refined = condition_A_report(spec.forcing, spec.p, spec.grid, refine_theta_grid(spec.theta_grid), th);
        out.sup_phi_refined = refined.sup_phi;
        out.sup_phi_change = out.norms.sup_phi > 0.0 ? std::abs(refined.sup_phi - out.norms.sup_phi) / out.norms.sup_phi
                                                     : (refined.sup_phi > 0.0 ? HUGE_VAL : 0.0);

        double worst[3] = {0, 0, 0}, worst_coarse[3] = {0, 0, 0}, scale = 0.0;
        for (double xi : spec.xi_list) {
            const auto b = fine.bundle(xi);
            const auto bc = coarse.bundle(xi);
            XiOutcome o{xi, membership_diagnostic(b.x_direct, spec.p, th), b.agreement_direct_voc,
                        b.agreement_voc_key2, b.agreement_direct_key2};
            out.per_xi.push_back(o);
            const double fine_d[3] = {b.agreement_direct_voc, b.agreement_voc_key2, b.agreement_direct_key2};
            const double coarse_d[3] = {bc.agreement_direct_voc, bc.agreement_voc_key2, bc.agreement_direct_key2};
            for (int k = 0; k < 3; ++k) {
                worst[k] = std::max(worst[k], fine_d[k]);
                worst_coarse[k] = std::max(worst_coarse[k], coarse_d[k]);
            }
            scale = std::max(scale, sup_norm(b.x_direct));
        }
        static const char* pair_names[] = {"direct-voc", "voc-key2", "direct-key2"};
        for (int k = 0; k < 3; ++k)
            out.agreement_checks.push_back(order_check(pair_names[k], worst_coarse[k], worst[k], scale));

        const auto& dec = fine.decomposition;
        out.f1_class = classify_membership(dec.f1, spec.p, th);
        out.f3_class = classify_membership(dec.f3, spec.p, th);
        out.key1_residual = dec.key1_residual;
        out.key1_window_end = dec.key1_window_end;
        out.key1_points = dec.key1_points;
        if (dec.key1_points > 0)
            out.key1_check = order_check("key1", coarse.decomposition.key1_residual, dec.key1_residual,
                                         sup_norm(dec.f3));

        // integrated equation at the largest |ξ| for all three paths
        const double xi_star = *std::max_element(spec.xi_list.begin(), spec.xi_list.end(),
                                                 [](double a, double b) { return std::abs(a) < std::abs(b); });
        const std::vector<double> thetas(std::begin(kResidualThetas), std::end(kResidualThetas));
        auto residual_errors = [&](const ForcedSolution& fs, const Grid& g) {
            const SolveConfig cfg(spec.measure, spec.forcing, xi_star, g);
            std::vector<Trajectory> averages;
            double sup_f = 0.0;
            for (double theta : thetas) {
                averages.push_back(interval_average(spec.forcing, theta, g.truncated(g.last_time() - theta)));
                sup_f = std::max(sup_f, sup_norm(averages.back()));
            }
            const auto b = fs.bundle(xi_star);
            std::vector<double> err(thetas.size(), 0.0);
            for (const auto* x : {&b.x_direct, &b.x_voc, &b.x_key2}) {
                const auto rs = integrated_residuals(*x, cfg, thetas, fs.table.get());
                for (std::size_t k = 0; k < thetas.size(); ++k)
                    err[k] = std::max(err[k], detail::sup_residual_error(rs, averages, k));
            }
            return std::pair{err, sup_f};
        };
        const auto [err_fine, sup_f] = residual_errors(fine, spec.grid);
        const auto [err_coarse, sup_fc] = residual_errors(coarse, coarse_grid);
        (void)sup_fc;
        for (std::size_t k = 0; k < thetas.size(); ++k)
            out.residual_checks.push_back(
                tolerance_check("integrated theta=" + report::fmt(thetas[k]), err_coarse[k], err_fine[k], sup_f));

        std::vector<std::string> problems;
        if (!out.conclusive())
            problems.push_back("a membership classification is inconclusive; enlarge T");
        if (spec.expected) {
            if (out.observed_A != spec.expected->A)
                problems.push_back(std::string("interval averages: expected ") + to_string(spec.expected->A) +
                                   ", observed " + to_string(out.observed_A));
            for (const auto& o : out.per_xi)
                if (o.B.classification != spec.expected->B)
                    problems.push_back("x(xi=" + report::fmt(o.xi) + "): expected " + to_string(spec.expected->B) +
                                       ", observed " + to_string(o.B.classification));
        } else if (!out.equivalence_holds()) {
            problems.push_back("interval-average and solution classifications differ");
        }
        for (const auto* group : {&out.agreement_checks, &out.residual_checks})
            for (const auto& c : *group)
                if (!c.pass)
                    problems.push_back("check " + c.name + " failed (coarse " + report::fmt(c.coarse) + ", fine " +
                                       report::fmt(c.fine) + ")");
        if (out.key1_check && !out.key1_check->pass)
            problems.push_back("check key1 failed (coarse " + report::fmt(out.key1_check->coarse) + ", fine " +
                               report::fmt(out.key1_check->fine) + ")");

        if (problems.empty()) {
            out.verdict = Verdict::pass;
        } else {
            out.verdict = out.conclusive() ? Verdict::fail : Verdict::inconclusive;
            for (std::size_t k = 0; k < problems.size(); ++k)
                out.message += (k ? "; " : "") + problems[k];
        }
        if (out_dir)
            detail::write_case_artifacts(*out_dir / spec.name, spec, res, &fine, out);
        return out;
    });
}

struct Delta0Report {
    Membership solution_class = Membership::inconclusive; ///< y = ∫ e^{−(t−s)} f(s) ds in L²
    Membership average_class = Membership::inconclusive;  ///< interval averages of f in L²
    bool agree = false;
    MembershipDiagnostic solution;
    NormReport averages;
};

/// Exponential smoothing y of f against the interval-average condition, both with p = 2.
inline Delta0Report run_delta0_special(const ForcingFunction& f, const Grid& grid, const Thresholds& th = {})
{
    const Measure m = Measure::point_mass(0.0, -1.0);
    const auto res = solve_resolvent(m, grid, th.tau_tail);
    const SolveConfig cfg(m, f, 0.0, grid);
    const auto y = solve_voc(cfg, res);
    Delta0Report rep;
    rep.solution = membership_diagnostic(y, 2.0, th);
    rep.solution_class = rep.solution.classification;
    const auto thetas = uniform_theta_grid();
    rep.averages = condition_A_report(f, 2.0, grid, thetas, th);
    rep.average_class = rep.averages.classification;
    rep.agree = rep.solution_class == rep.average_class && rep.solution_class != Membership::inconclusive;
    return rep;
}

inline config::json to_json(const CaseResult& r)
{
    using config::json;
    json j;
    j["name"] = r.name;
    j["measure"] = r.measure_text;
    j["forcing"] = r.forcing_text;
    j["p"] = r.p;
    j["h"] = r.h;
    j["T"] = r.T;
    j["resolvent"] = {{"verdict", to_string(r.resolvent.verdict)},
                      {"l1_truncated", r.resolvent.truncated},
                      {"tail_increment", r.resolvent.increment}};
    if (r.expected)
        j["expected"] = {{"A", to_string(r.expected->A)}, {"B", to_string(r.expected->B)}};
    j["verdict"] = to_string(r.verdict);
    j["message"] = r.message;
    if (r.resolvent.verdict != L1Verdict::integrable)
        return j;
    j["observed_A"] = to_string(r.observed_A);
    j["sup_phi"] = r.norms.sup_phi;
    j["sup_phi_refined"] = r.sup_phi_refined;
    j["sup_phi_change"] = r.sup_phi_change;
    json xs = json::array();
    for (const auto& o : r.per_xi)
        xs.push_back({{"xi", o.xi},
                      {"observed_B", to_string(o.B.classification)},
                      {"lp_T", o.B.lp_full},
                      {"lp_half", o.B.lp_half},
                      {"agreement_direct_voc", o.agreement_direct_voc},
                      {"agreement_voc_key2", o.agreement_voc_key2},
                      {"agreement_direct_key2", o.agreement_direct_key2}});
    j["per_xi"] = xs;
    j["f1"] = to_string(r.f1_class);
    j["f3"] = to_string(r.f3_class);
    j["key1"] = {{"residual", r.key1_residual}, {"window_end", r.key1_window_end}, {"points", r.key1_points}};
    json checks = json::array();
    auto add = [&](const ConvergenceCheck& c) {
        checks.push_back({{"name", c.name},
                          {"coarse", c.coarse},
                          {"fine", c.fine},
                          {"ratio", std::isfinite(c.ratio) ? json(c.ratio) : json(nullptr)},
                          {"at_floor", c.at_floor},
                          {"pass", c.pass}});
    };
    for (const auto& c : r.agreement_checks)
        add(c);
    if (r.key1_check)
        add(*r.key1_check);
    for (const auto& c : r.residual_checks)
        add(c);
    j["checks"] = checks;
    return j;
}

struct SuiteResult {
    std::vector<CaseResult> cases;
    Verdict overall = Verdict::pass;
};

/// Runs every case (in parallel over `workers` threads), writes per-case
/// artifacts and summary.csv / summary.json under out_dir. Output does not
/// depend on scheduling.
inline SuiteResult run_suite(const std::vector<CaseSpec>& specs, std::optional<std::filesystem::path> out_dir,
                             unsigned workers = std::max(1u, std::thread::hardware_concurrency()))
{
    if (specs.empty())
        throw ConfigError("run_suite: empty suite");
    for (std::size_t a = 0; a < specs.size(); ++a)
        for (std::size_t b = a + 1; b < specs.size(); ++b)
            if (specs[a].name == specs[b].name)
                throw ConfigError("run_suite: duplicate case name '" + specs[a].name + "'");
    SuiteResult out;
    out.cases.resize(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < specs.size(); k = next++) {
            try {
                out.cases[k] = run_case(specs[k], out_dir);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(specs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    bool any_fail = false, any_inconclusive = false;
    for (const auto& c : out.cases) {
        any_fail = any_fail || c.verdict == Verdict::fail;
        any_inconclusive = any_inconclusive || c.verdict == Verdict::inconclusive;
    }
    out.overall = any_fail ? Verdict::fail : (any_inconclusive ? Verdict::inconclusive : Verdict::pass);

    if (out_dir) {
        config::json j;
        j["overall"] = to_string(out.overall);
        j["cases"] = config::json::array();
        for (const auto& c : out.cases)
            j["cases"].push_back(to_json(c));
        auto js = report::open(*out_dir / "summary.json");
        js << j.dump(2) << '\n';
        auto csv = report::open(*out_dir / "summary.csv");
        csv << "name,p,h,T,resolvent,expected,observed_A,observed_B,sup_phi,key1_residual,verdict\n";
        for (const auto& c : out.cases) {
            std::string bs;
            for (std::size_t k = 0; k < c.per_xi.size(); ++k)
                bs += (k ? "|" : "") + std::string(to_string(c.per_xi[k].B.classification));
            const bool ran = c.resolvent.verdict == L1Verdict::integrable;
            csv << c.name << ',' << report::fmt(c.p) << ',' << report::fmt(c.h) << ',' << report::fmt(c.T) << ','
                << to_string(c.resolvent.verdict) << ',' << (c.expected ? to_string(c.expected->A) : "") << ','
                << (ran ? to_string(c.observed_A) : "") << ',' << bs << ','
                << (ran ? report::fmt(c.norms.sup_phi) : "") << ',' << (ran ? report::fmt(c.key1_residual) : "")
                << ',' << to_string(c.verdict) << '\n';
        }
    }
    return out;
}

} // namespace volterra
