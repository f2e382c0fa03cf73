// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "volterra/volterra.hpp"

using namespace volterra;

namespace {

constexpr double kResolventTol = 1e-5;
constexpr double kResolventBudget = 1.0;
constexpr double kOracleBudget = 10.0;
constexpr double kOscBudget = 60.0;
constexpr double kSlopeTol = 0.10;
constexpr double kThetaStability = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool in_band(double ratio) { return ratio >= kOrderLow && ratio <= kOrderHigh; }

double max_error(const Trajectory& x, const std::function<double(double)>& exact)
{
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        e = std::max(e, std::abs(x[i] - exact(x.grid().time(i))));
    return e;
}

int failures = 0;

void report_line(int n, bool ok, const std::string& what, const std::string& detail)
{
    std::printf("criterion %2d %s  %s: %s\n", n, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void resolvent_accuracy()
{
    const Measure m = Measure::point_mass(0.0, -1.0);
    auto exact = [](double t) { return std::exp(-t); };
    const auto t0 = Clock::now();
    const auto res = solve_resolvent(m, Grid(1e-3, 20.0));
    const double elapsed = seconds_since(t0);
    const double err = max_error(res.r, exact);
    const double err_half = max_error(solve_resolvent(m, Grid(5e-4, 20.0)).r, exact);
    const double ratio = err / err_half;
    report_line(1, err < kResolventTol && in_band(ratio) && elapsed < kResolventBudget, "resolvent of -delta0",
                "max err " + num(err) + ", ratio " + num(ratio) + ", " + num(elapsed) + " s");
}

void oracle_kernels()
{
    const auto t0 = Clock::now();
    const Measure density({}, Density::exp_decay(-1.0, 1.0, 40.0));
    const double d1 = max_error(solve_resolvent(density, Grid(1e-2, 20.0)).r, oracle::exp_density_resolvent);
    const double d2 = max_error(solve_resolvent(density, Grid(5e-3, 20.0)).r, oracle::exp_density_resolvent);
    const oracle::DelayResolvent steps(-1.0, 1.0, 6.0);
    const Measure delay = Measure::point_mass(1.0, -1.0);
    const double s1 = max_error(solve_resolvent(delay, Grid(1e-3, 6.0)).r, steps);
    const double s2 = max_error(solve_resolvent(delay, Grid(5e-4, 6.0)).r, steps);
    const double elapsed = seconds_since(t0);
    report_line(2, in_band(d1 / d2) && in_band(s1 / s2) && d2 < 1e-4 && s2 < 1e-6 && elapsed < kOracleBudget,
                "density and delay oracles",
                "density err " + num(d2) + " ratio " + num(d1 / d2) + "; delay err " + num(s2) + " ratio " +
                    num(s1 / s2) + "; " + num(elapsed) + " s");
}

void triple_agreement(const SuiteResult& suite)
{
    std::string bad;
    std::size_t at_floor = 0, total = 0;
    for (const auto& c : suite.cases)
        for (const auto& k : c.agreement_checks) {
            ++total;
            at_floor += k.at_floor;
            if (!k.pass)
                bad += " " + c.name + ":" + k.name + "(ratio " + num(k.ratio) + ")";
        }
    report_line(3, bad.empty() && total > 0, "triple solution agreement",
                std::to_string(total) + " checks, " + std::to_string(at_floor) + " at rounding level" +
                    (bad.empty() ? "" : ";" + bad));
}

void key1_identity(const std::vector<CaseSpec>& specs, const SuiteResult& suite)
{
    std::string bad;
    std::size_t in_suite = 0;
    for (const auto& c : suite.cases)
        if (c.key1_check) {
            ++in_suite;
            if (!c.key1_check->pass)
                bad += " " + c.name + "(ratio " + num(c.key1_check->ratio) + ")";
        }
    // every suite forcing on one common grid pair, so each gets a nonempty window
    std::set<std::string> seen;
    std::size_t swept = 0, floor_hits = 0;
    for (const auto& s : specs) {
        if (!seen.insert(s.forcing.describe()).second)
            continue;
        const double T = 12.0;
        const auto coarse = decompose(s.forcing, Grid(2e-3, T));
        const auto fine = decompose(s.forcing, Grid(1e-3, T), nullptr, coarse.key1_window_end);
        const auto chk = order_check("key1", coarse.key1_residual, fine.key1_residual, sup_norm(fine.f3));
        ++swept;
        floor_hits += chk.at_floor;
        if (fine.key1_points == 0 || !chk.pass)
            bad += " " + s.forcing.describe() + "(ratio " + num(chk.ratio) + ", points " +
                   std::to_string(fine.key1_points) + ")";
    }
    report_line(4, bad.empty(), "decomposition identity",
                std::to_string(in_suite) + " suite checks, " + std::to_string(swept) + " forcings swept (" +
                    std::to_string(floor_hits) + " exact to rounding)" + (bad.empty() ? "" : ";" + bad));
}

void integrated_identity(const SuiteResult& suite)
{
    std::string bad;
    std::size_t total = 0;
    for (const auto& c : suite.cases) {
        for (const auto& k : c.residual_checks) {
            ++total;
            if (!k.pass)
                bad += " " + c.name + ":" + k.name + "(coarse " + num(k.coarse) + ", fine " + num(k.fine) + ")";
        }
        if (c.residual_checks.size() != std::size(kResidualThetas))
            bad += " " + c.name + ":missing";
    }
    report_line(5, bad.empty() && total > 0, "integrated equation",
                std::to_string(total) + " checks" + (bad.empty() ? "" : ";" + bad));
}

void oscillatory_example()
{
    const auto t0 = Clock::now();
    const double T = 12.0;
    const Grid g(1e-4, T);
    const auto f = ForcingFunction::osc_growth(1.0, 2.0);
    double worst = 0.0;
    bool slopes_ok = true;
    for (double theta : uniform_theta_grid()) {
        const auto F = interval_average(f, theta, g.truncated(T - theta));
        const auto fit = quad::peak_envelope(F, 2.0, 0.8 * T, 16);
        if (!fit.log_fit) {
            slopes_ok = false;
            continue;
        }
        const double dev = std::abs(-fit.log_fit->slope - 1.0);
        worst = std::max(worst, dev);
        slopes_ok = slopes_ok && dev <= kSlopeTol;
    }
    const auto sampled = Trajectory::sample(g, [&](double t) { return f.eval(t); });
    const auto p1 = membership_diagnostic(sampled, 1.0);
    const auto p2 = membership_diagnostic(sampled, 2.0);
    const double elapsed = seconds_since(t0);
    const bool ok = slopes_ok && p1.classification == Membership::infinite &&
                    p2.classification == Membership::infinite && elapsed < kOscBudget;
    report_line(6, ok, "oscillatory growth example",
                "worst decay-rate deviation " + num(worst) + ", f in L1 " + to_string(p1.classification) +
                    " (increment " + num(p1.increment) + "), f in L2 " + to_string(p2.classification) +
                    " (increment " + num(p2.increment) + "), " + num(elapsed) + " s");
}

void equivalence(const SuiteResult& suite)
{
    const auto violation = run_case(parse_case(config::load_file(VOLTERRA_CONFIG_DIR "/hypothesis_violation.json")));
    std::string bad;
    std::size_t conclusive = 0;
    for (const auto& c : suite.cases) {
        std::set<double> xs;
        for (const auto& o : c.per_xi)
            xs.insert(o.xi);
        if (!xs.count(0.0) || !xs.count(1.0) || !xs.count(10.0))
            bad += " " + c.name + ":xi_list";
        if (!c.conclusive()) {
            bad += " " + c.name + ":inconclusive";
            continue;
        }
        ++conclusive;
        if (!c.equivalence_holds() || c.verdict != Verdict::pass)
            bad += " " + c.name + "(" + to_string(c.verdict) + ")";
    }
    const bool ok = suite.cases.size() >= 10 && bad.empty() && violation.verdict == Verdict::inconclusive;
    report_line(7, ok, "solution/forcing equivalence",
                std::to_string(conclusive) + "/" + std::to_string(suite.cases.size()) +
                    " cases conclusive and equivalent, zero kernel " + to_string(violation.verdict) +
                    (bad.empty() ? "" : ";" + bad));
}

void delta0_special()
{
    struct Item {
        ForcingFunction f;
        Grid grid;
    };
    const std::vector<Item> items = {{ForcingFunction::constant(0.0), Grid(1e-3, 20.0)},
                                     {ForcingFunction::constant(1.0), Grid(1e-3, 20.0)},
                                     {ForcingFunction::exp_decay(1.0), Grid(1e-3, 20.0)},
                                     {ForcingFunction::osc_growth(1.0, 2.0), Grid(1e-3, 12.0)},
                                     {ForcingFunction::inverse_linear(), Grid(1e-2, 200.0)}};
    std::string detail;
    bool ok = true;
    for (const auto& it : items) {
        const auto rep = run_delta0_special(it.f, it.grid);
        ok = ok && rep.agree;
        detail += (detail.empty() ? "" : ", ") + it.f.describe() + " " + to_string(rep.solution_class) + "/" +
                  to_string(rep.average_class);
    }
    report_line(8, ok, "exponential smoothing special case", detail);
}

void theta_stability(const SuiteResult& suite)
{
    double worst = 0.0;
    std::size_t n = 0;
    std::string bad;
    for (const auto& c : suite.cases)
        if (c.observed_A == Membership::finite) {
            ++n;
            worst = std::max(worst, c.sup_phi_change);
            if (!(c.sup_phi_change <= kThetaStability))
                bad += " " + c.name + "(" + num(c.sup_phi_change) + ")";
        }
    report_line(9, bad.empty() && n > 0, "sup phi stable under theta refinement",
                std::to_string(n) + " finite cases, worst relative change " + num(worst) +
                    (bad.empty() ? "" : ";" + bad));
}

void decomposition_pieces(const SuiteResult& suite)
{
    std::size_t n = 0;
    std::string bad;
    for (const auto& c : suite.cases)
        if (c.observed_A == Membership::finite) {
            ++n;
            if (c.f1_class != Membership::finite || c.f3_class != Membership::finite)
                bad += std::string(" ") + c.name + "(f1 " + to_string(c.f1_class) + ", f3 " + to_string(c.f3_class) +
                       ")";
        }
    report_line(10, bad.empty() && n > 0, "f1 and f3 finite in finite cases",
                std::to_string(n) + " finite cases" + (bad.empty() ? "" : ";" + bad));
}

} // namespace

int main()
{
    try {
        resolvent_accuracy();
        oracle_kernels();
        const auto specs = parse_suite(config::load_file(VOLTERRA_CONFIG_DIR "/suite.json"));
        const auto t0 = Clock::now();
        const auto suite = run_suite(specs, std::nullopt);
        std::printf("suite: %zu cases, overall %s, %.1f s\n", suite.cases.size(), to_string(suite.overall),
                    seconds_since(t0));
        for (const auto& c : suite.cases)
            if (c.verdict != Verdict::pass)
                std::printf("  %s %s: %s\n", c.name.c_str(), to_string(c.verdict), c.message.c_str());
        triple_agreement(suite);
        key1_identity(specs, suite);
        integrated_identity(suite);
        oscillatory_example();
        equivalence(suite);
        delta0_special();
        theta_stability(suite);
        decomposition_pieces(suite);
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
