#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "volterra/volterra.hpp"

namespace fs = std::filesystem;
using namespace volterra;
using config::json;

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<double> h;
    std::optional<double> T;
    std::optional<double> p;
    bool delta0 = false;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

void apply_overrides(json& c, const Options& o)
{
    if (o.h || o.T) {
        if (!c.contains("grid") || !c["grid"].is_object())
            c["grid"] = json::object();
        if (o.h)
            c["grid"]["h"] = *o.h;
        if (o.T)
            c["grid"]["T"] = *o.T;
    }
    if (o.p)
        c["p"] = *o.p;
}

json load_case(const Options& o)
{
    auto j = config::load_file(o.config);
    apply_overrides(j, o);
    return j;
}

void print_kv(const json& j)
{
    for (const auto& [k, v] : j.items())
        std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

int exit_for(L1Verdict v)
{
    switch (v) {
    case L1Verdict::integrable: return 0;
    case L1Verdict::suspect_nonintegrable: return 1;
    case L1Verdict::inconclusive: return 2;
    }
    return 2;
}

int run_resolvent(const Options& o)
{
    const auto j = load_case(o);
    const auto m = config::parse_measure(config::detail::field(j, "measure", "config"), "measure");
    const auto g = config::parse_grid(config::detail::field(j, "grid", "config"), "grid");
    const auto th = j.contains("thresholds") ? config::parse_thresholds(j.at("thresholds")) : Thresholds{};
    const auto res = solve_resolvent(m, g, th.tau_tail);
    const fs::path dir(o.out);
    const auto t = report::times(g);
    report::write_csv(dir / "resolvent.csv", {{"t", t}, {"r", res.r.values()}, {"r_prime", res.r_prime.values()}});
    report::write_svg(dir / "resolvent.svg", "resolvent", {{"r", t, res.r.values()}, {"r'", t, res.r_prime.values()}});
    json rec{{"measure", describe(m)},
             {"h", g.step()},
             {"T", g.last_time()},
             {"l1_truncated", res.l1_truncated},
             {"l1_tail_rate", res.l1_tail_rate ? json(*res.l1_tail_rate) : json(nullptr)},
             {"l1_verdict", to_string(res.l1_verdict)}};
    report::open(dir / "resolvent.json") << rec.dump(2) << '\n';
    print_kv(rec);
    return exit_for(res.l1_verdict);
}

int run_solve(const Options& o)
{
    const auto spec = parse_case(load_case(o));
    const auto fsol = solve_forced(spec.measure, spec.forcing, spec.grid, spec.thresholds.tau_tail);
    const fs::path dir(o.out);
    const auto t = report::times(spec.grid);
    json summary = json::array();
    std::vector<report::Series> plot;
    std::vector<std::vector<double>> keep;
    keep.reserve(spec.xi_list.size());
    for (std::size_t k = 0; k < spec.xi_list.size(); ++k) {
        const double xi = spec.xi_list[k];
        const auto b = fsol.bundle(xi);
        report::write_csv(dir / ("solution_xi" + std::to_string(k) + ".csv"),
                          {{"t", t}, {"x_direct", b.x_direct.values()}, {"x_voc", b.x_voc.values()},
                           {"x_key2", b.x_key2.values()}});
        keep.emplace_back(b.x_direct.values().begin(), b.x_direct.values().end());
        plot.push_back({"xi=" + report::fmt(xi), t, keep.back()});
        summary.push_back({{"xi", xi},
                           {"agreement_direct_voc", b.agreement_direct_voc},
                           {"agreement_voc_key2", b.agreement_voc_key2},
                           {"agreement_direct_key2", b.agreement_direct_key2}});
    }
    report::write_svg(dir / "solution.svg", spec.name + ": x(t)", plot);
    json rec{{"case", spec.name},
             {"resolvent", to_string(fsol.resolvent.l1_verdict)},
             {"per_xi", summary}};
    report::open(dir / "solution.json") << rec.dump(2) << '\n';
    std::cout << rec.dump(2) << '\n';
    return 0;
}

int run_decompose(const Options& o)
{
    const auto j = load_case(o);
    const auto f = config::parse_forcing(config::detail::field(j, "forcing", "config"), "forcing");
    const auto g = config::parse_grid(config::detail::field(j, "grid", "config"), "grid");
    const auto d = decompose(f, g);
    const fs::path dir(o.out);
    const auto t = report::times(g);
    std::vector<double> fv(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        fv[i] = f.eval(t[i]);
    report::write_csv(dir / "decomposition.csv",
                      {{"t", t}, {"f", fv}, {"f1", d.f1.values()}, {"f2", d.f2.values()}, {"f3", d.f3.values()}});
    report::write_svg(dir / "decomposition.svg", "f1, f3", {{"f1", t, d.f1.values()}, {"f3", t, d.f3.values()}});
    json rec{{"forcing", f.describe()},
             {"key1_residual", d.key1_residual},
             {"key1_window_end", d.key1_window_end},
             {"key1_points", d.key1_points}};
    print_kv(rec);
    return 0;
}

int run_norms(const Options& o)
{
    const auto spec = parse_case(load_case(o));
    const auto rep = condition_A_report(spec.forcing, spec.p, spec.grid, spec.theta_grid, spec.thresholds);
    const fs::path dir(o.out);
    report::write_csv(dir / "norms.csv", {{"theta", rep.theta_grid},
                                          {"phi_halfT", rep.phi_half},
                                          {"phi_T", rep.phi},
                                          {"ratio", rep.half_horizon_ratio}});
    report::write_svg(dir / "norms.svg", "phi(theta)",
                      {{"phi_T", rep.theta_grid, rep.phi}, {"phi_T/2", rep.theta_grid, rep.phi_half}});
    json rec{{"p", rep.p}, {"sup_phi", rep.sup_phi}, {"classification", to_string(rep.classification)}};
    print_kv(rec);
    return rep.classification == Membership::inconclusive ? exit_code(Verdict::inconclusive) : 0;
}

int run_theorem_check(const Options& o)
{
    const auto j = load_case(o);
    if (o.delta0) {
        const auto f = config::parse_forcing(config::detail::field(j, "forcing", "config"), "forcing");
        const auto g = config::parse_grid(config::detail::field(j, "grid", "config"), "grid");
        const auto th = j.contains("thresholds") ? config::parse_thresholds(j.at("thresholds")) : Thresholds{};
        const auto rep = run_delta0_special(f, g, th);
        json rec{{"forcing", f.describe()},
                 {"smoothed_solution", to_string(rep.solution_class)},
                 {"interval_averages", to_string(rep.average_class)},
                 {"agree", rep.agree}};
        print_kv(rec);
        if (rep.solution_class == Membership::inconclusive || rep.average_class == Membership::inconclusive)
            return exit_code(Verdict::inconclusive);
        return rep.agree ? 0 : 1;
    }
    const auto spec = parse_case(j);
    const auto r = run_case(spec, fs::path(o.out));
    const auto rec = to_json(r);
    report::open(fs::path(o.out) / "result.json") << rec.dump(2) << '\n';
    std::cout << rec.dump(2) << '\n';
    return exit_code(r.verdict);
}

int run_suite_cmd(const Options& o)
{
    auto j = config::load_file(o.config);
    if (j.contains("cases") && j["cases"].is_array())
        for (auto& c : j["cases"])
            apply_overrides(c, o);
    const auto specs = parse_suite(j);
    const auto res = run_suite(specs, fs::path(o.out), o.jobs);
    for (const auto& c : res.cases) {
        std::printf("%-22s %-13s", c.name.c_str(), to_string(c.verdict));
        if (!c.message.empty())
            std::printf("  %s", c.message.c_str());
        std::printf("\n");
    }
    std::printf("overall: %s\n", to_string(res.overall));
    return exit_code(res.overall);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Linear convolution Volterra integrodifferential equations: solvers and Lp checks"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--h", o.h, "grid step override")->check(CLI::PositiveNumber);
        sub->add_option("--T", o.T, "horizon override")->check(CLI::PositiveNumber);
        sub->add_option("--p", o.p, "Lp exponent override");
    };
    auto* resolvent = app.add_subcommand("resolvent", "differential resolvent r, r' and the L1 diagnostic");
    auto* solve = app.add_subcommand("solve", "direct, variation-of-constants and reconstructed solutions");
    auto* decomp = app.add_subcommand("decompose", "f = f1 + f2 and f3 = int f2, with the identity residual");
    auto* norms = app.add_subcommand("norms", "interval-average Lp scan over theta");
    auto* theorem = app.add_subcommand("theorem-check", "one case end to end");
    auto* suite = app.add_subcommand("suite", "every case in a suite file");
    for (auto* s : {resolvent, solve, decomp, norms, theorem, suite})
        common(s);
    theorem->add_flag("--delta0", o.delta0, "exponential smoothing against the interval averages (p = 2)");
    suite->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (*resolvent)
            return run_resolvent(o);
        if (*solve)
            return run_solve(o);
        if (*decomp)
            return run_decompose(o);
        if (*norms)
            return run_norms(o);
        if (*theorem)
            return run_theorem_check(o);
        return run_suite_cmd(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(Verdict::fail);
    }
}
