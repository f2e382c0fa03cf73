#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "volterra/config.hpp"

using namespace volterra;
using config::json;

TEST(ConfigGrid, Parses)
{
    const auto g = config::parse_grid(json::parse(R"({"h": 0.01, "T": 5})"));
    EXPECT_DOUBLE_EQ(g.step(), 0.01);
    EXPECT_EQ(g.n_points(), 501u);
    EXPECT_THROW(config::parse_grid(json::parse(R"({"h": 0.01})")), ConfigError);
    EXPECT_THROW(config::parse_grid(json::parse(R"({"h": "x", "T": 1})")), ConfigError);
}

TEST(ConfigMeasure, AtomsAndDensity)
{
    const auto m = config::parse_measure(json::parse(R"({
        "atoms": [{"location": 0, "weight": -1}, {"location": 1, "weight": 0.5}],
        "density": {"kind": "exp_decay", "coefficient": -1, "rate": 1, "s_max": 40}})"));
    ASSERT_EQ(m.atoms().size(), 2u);
    EXPECT_EQ(m.mass_at_zero(), -1.0);
    ASSERT_TRUE(m.density());
    EXPECT_NEAR((*m.density())(1.0), -std::exp(-1.0), 1e-15);
    EXPECT_DOUBLE_EQ(m.density()->s_max(), 40.0);
}

TEST(ConfigMeasure, DensityKinds)
{
    const auto c = config::parse_density(json::parse(R"({"kind": "constant", "c": 2, "s_max": 1})"));
    EXPECT_EQ(c(0.5), 2.0);
    const auto p = config::parse_density(json::parse(R"({"kind": "polynomial", "coefficients": [1, 0, 3], "s_max": 2})"));
    EXPECT_DOUBLE_EQ(p(2.0), 13.0);
    EXPECT_THROW(config::parse_density(json::parse(R"({"kind": "gamma", "s_max": 1})")), ConfigError);
    EXPECT_THROW(config::parse_density(json::parse(R"({"kind": "constant", "c": 1})")), ConfigError);
}

TEST(ConfigMeasure, InvalidAtoms)
{
    EXPECT_THROW(config::parse_measure(json::parse(R"({"atoms": [{"location": -1, "weight": 1}]})")), ConfigError);
    EXPECT_THROW(config::parse_measure(json::parse(R"({"atoms": [{"weight": 1}]})")), ConfigError);
    EXPECT_THROW(config::parse_measure(json::parse(R"({"atoms": 3})")), ConfigError);
}

TEST(ConfigForcing, AllKinds)
{
    const auto osc = config::parse_forcing(json::parse(R"({"kind": "osc_growth", "alpha": 1.0, "beta": 2.0})"));
    EXPECT_EQ(osc.kind(), ForcingKind::osc_growth);
    EXPECT_NEAR(osc.eval(0.0), std::sin(1.0), 1e-15);
    EXPECT_NEAR(config::parse_forcing(json::parse(R"({"kind": "lp_member", "name": "exp_decay", "rate": 2})")).eval(1.0),
                std::exp(-2.0), 1e-15);
    EXPECT_NEAR(config::parse_forcing(json::parse(R"({"kind": "lp_member", "name": "inverse_linear"})")).eval(1.0), 0.5,
                1e-15);
    EXPECT_NEAR(config::parse_forcing(json::parse(R"({"kind": "lp_member", "name": "power", "exponent": 2})")).eval(1.0),
                0.25, 1e-15);
    EXPECT_EQ(config::parse_forcing(json::parse(R"({"kind": "step_train", "amplitudes": [1, -2], "widths": [1, 1]})"))
                  .eval(1.5),
              -2.0);
    EXPECT_EQ(config::parse_forcing(json::parse(R"({"kind": "constant", "c": 4})")).eval(3.0), 4.0);
    EXPECT_NEAR(config::parse_forcing(json::parse(R"({"kind": "sine", "frequency": 1})")).eval(0.25), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(config::parse_forcing(json::parse(R"({"kind": "tabulated", "h": 0.5, "values": [0, 1, 2]})"))
                         .eval(0.75),
                     1.5);
    const auto sum = config::parse_forcing(json::parse(R"({"kind": "sum", "weights": [2, -1],
        "terms": [{"kind": "constant", "c": 1}, {"kind": "constant", "c": 3}]})"));
    EXPECT_EQ(sum.eval(1.0), -1.0);
}

TEST(ConfigForcing, Errors)
{
    EXPECT_THROW(config::parse_forcing(json::parse(R"({"kind": "osc_growth", "alpha": 3, "beta": 2})")), ConfigError);
    EXPECT_THROW(config::parse_forcing(json::parse(R"({"kind": "wavelet"})")), ConfigError);
    EXPECT_THROW(config::parse_forcing(json::parse(R"({"kind": "lp_member", "name": "gauss"})")), ConfigError);
    EXPECT_THROW(config::parse_forcing(json::parse(R"({"kind": "tabulated", "h": 0.5, "values": [1]})")), ConfigError);
    EXPECT_THROW(config::parse_forcing(json::parse(R"({"kind": "sum", "terms": []})")), ConfigError);
    EXPECT_THROW(config::parse_forcing(json::parse(R"({"kind": "sum", "weights": [1],
        "terms": [{"kind": "constant", "c": 1}, {"kind": "constant", "c": 3}]})")),
                 ConfigError);
}

TEST(ConfigThresholds, DefaultsAndValidation)
{
    const auto th = config::parse_thresholds(json::object());
    EXPECT_EQ(th.tau_growth, 1e-2);
    EXPECT_EQ(th.tau_blow, 0.2);
    EXPECT_EQ(th.tau_tail, 1e-3);
    EXPECT_EQ(config::parse_thresholds(json::parse(R"({"tau_blow": 0.5})")).tau_blow, 0.5);
    EXPECT_THROW(config::parse_thresholds(json::parse(R"({"tau_blow": 0.001})")), ConfigError);
}

TEST(ConfigMembership, Values)
{
    EXPECT_EQ(config::parse_membership("finite", "x"), Membership::finite);
    EXPECT_EQ(config::parse_membership("infinite", "x"), Membership::infinite);
    EXPECT_THROW(config::parse_membership("maybe", "x"), ConfigError);
}

TEST(ConfigFile, LoadAndErrors)
{
    const auto dir = std::filesystem::temp_directory_path() / "volterra_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "ok.json") << "// comment\n{\"h\": 0.5, \"T\": 1}\n";
        std::ofstream(dir / "bad.json") << "{\"h\": ";
    }
    EXPECT_EQ(config::parse_grid(config::load_file((dir / "ok.json").string())).n_points(), 3u);
    EXPECT_THROW(config::load_file((dir / "bad.json").string()), ConfigError);
    EXPECT_THROW(config::load_file((dir / "missing.json").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
