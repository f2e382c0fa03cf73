#include <gtest/gtest.h>

#include <cmath>

#include "volterra/norms.hpp"
#include "volterra/solver.hpp"

using namespace volterra;

TEST(TruncatedLp, Examples)
{
    const Grid g(1e-3, 20.0);
    EXPECT_EQ(truncated_lp(Trajectory(g), 2.0), 0.0);
    const auto e = Trajectory::sample(g, [](double t) { return std::exp(-t); });
    EXPECT_NEAR(truncated_lp(e, 2.0), 0.5, 1e-6);
    for (double T : {10.0, 20.0, 40.0}) {
        const auto x = Trajectory::sample(Grid(1e-3, T), [](double t) { return 1.0 / (1.0 + t); });
        EXPECT_NEAR(truncated_lp(x, 1.0), std::log1p(T), 1e-6) << "T=" << T;
    }
}

TEST(TruncatedLp, RejectsPBelowOne)
{
    EXPECT_THROW(truncated_lp(Trajectory(Grid(0.1, 1.0)), 0.5), DomainError);
}

TEST(TruncatedLp, ScalingAndMonotoneTruncation)
{
    const Grid g(1e-2, 10.0);
    const auto x = Trajectory::sample(g, [](double t) { return std::sin(t) * std::exp(-0.1 * t); });
    const auto cx = Trajectory::sample(g, [](double t) { return -3.0 * std::sin(t) * std::exp(-0.1 * t); });
    for (double p : {1.0, 1.5, 2.0}) {
        EXPECT_NEAR(truncated_lp(cx, p), std::pow(3.0, p) * truncated_lp(x, p), 1e-12 * truncated_lp(cx, p));
        EXPECT_LE(truncated_lp(x, p, 5.0), truncated_lp(x, p));
    }
}

TEST(ClassifyMembership, Examples)
{
    const Grid g(1e-3, 40.0);
    EXPECT_EQ(classify_membership(Trajectory::sample(g, [](double t) { return std::exp(-t); }), 2.0), Membership::finite);
    EXPECT_EQ(classify_membership(Trajectory::sample(g, [](double) { return 1.0; }), 1.0), Membership::infinite);
    EXPECT_EQ(classify_membership(Trajectory::sample(g, [](double t) { return 1.0 / (1.0 + t); }), 1.0),
              Membership::infinite);
    EXPECT_EQ(classify_membership(Trajectory(g), 1.0), Membership::finite);
}

TEST(ClassifyMembership, PeriodicIsInfinite)
{
    const Grid g(1e-3, 20.0);
    const auto x = Trajectory::sample(g, [](double t) { return 10.0 * std::exp(-2.0 * t) + 0.01 * std::sin(6.0 * t); });
    EXPECT_EQ(classify_membership(x, 1.0), Membership::infinite);
}

TEST(ClassifyMembership, RoundingFloorTailIsNotStagnant)
{
    // decays, then sits on a flat residue 1e-15 of its peak
    const auto x = Trajectory::sample(Grid(1e-2, 40.0), [](double t) { return std::exp(-2.0 * t) + 3e-16; });
    const auto d = membership_diagnostic(x, 1.0);
    EXPECT_TRUE(d.tail_at_rounding);
    EXPECT_FALSE(d.stagnant);
    EXPECT_EQ(d.classification, Membership::finite);
    // the same floor at signal level is a genuine non-decaying tail
    const auto y = Trajectory::sample(Grid(1e-2, 40.0), [](double t) { return std::exp(-2.0 * t) + 1e-3; });
    EXPECT_EQ(classify_membership(y, 1.0), Membership::infinite);
}

TEST(ClassifyMembership, SlowDecayIsInconclusive)
{
    // ∫ e^{-t/4}: the increment from T/2 to T is e^{-2.5}, between tau_growth and tau_blow
    const auto x = Trajectory::sample(Grid(1e-2, 20.0), [](double t) { return std::exp(-t / 4.0); });
    const auto d = membership_diagnostic(x, 1.0);
    EXPECT_GT(d.increment, 0.01);
    EXPECT_LT(d.increment, 0.2);
    EXPECT_EQ(d.classification, Membership::inconclusive);
}

TEST(ConditionA, ZeroForcing)
{
    const auto thetas = uniform_theta_grid();
    const auto rep = condition_A_report(ForcingFunction::constant(0.0), 1.0, Grid(1e-2, 10.0), thetas);
    for (double v : rep.phi)
        EXPECT_EQ(v, 0.0);
    EXPECT_EQ(rep.classification, Membership::finite);
}

TEST(ConditionA, ConstantForcingGrowsLinearly)
{
    const auto thetas = uniform_theta_grid();
    const Grid g(1.0 / 64.0, 20.0);
    const auto rep = condition_A_report(ForcingFunction::constant(1.0), 1.0, g, thetas);
    EXPECT_EQ(rep.classification, Membership::infinite);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        EXPECT_NEAR(rep.phi[k], thetas[k] * (20.0 - thetas[k]), 1e-9);
        EXPECT_NEAR(rep.half_horizon_ratio[k], 2.0, 1e-9);
    }
}

TEST(ConditionA, OscillatoryGrowthExample)
{
    const std::vector<double> thetas = {0.1, 0.25, 0.5, 1.0};
    const auto rep = condition_A_report(ForcingFunction::osc_growth(1.0, 2.0), 2.0, Grid(1e-4, 20.0), thetas);
    EXPECT_EQ(rep.classification, Membership::finite);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        EXPECT_GE(rep.phi[k], rep.phi_half[k]);
        EXPECT_LE(rep.half_horizon_ratio[k], 1.01);
    }
}

TEST(ConditionA, ReportInvariants)
{
    const auto thetas = uniform_theta_grid();
    const auto rep = condition_A_report(ForcingFunction::exp_decay(0.5), 2.0, Grid(1e-2, 30.0), thetas);
    EXPECT_EQ(rep.theta_grid.size(), 16u);
    EXPECT_EQ(rep.sup_phi, *std::max_element(rep.phi.begin(), rep.phi.end()));
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        EXPECT_GE(rep.phi[k], 0.0);
        EXPECT_LE(rep.phi_half[k], rep.phi[k]);
    }
    if (rep.classification == Membership::finite) {
        for (double r : rep.half_horizon_ratio)
            EXPECT_LE(r, 1.01);
    }
}

TEST(ConditionA, Errors)
{
    const Grid g(1e-2, 10.0);
    const auto f = ForcingFunction::constant(1.0);
    const std::vector<double> none;
    const std::vector<double> one = {0.5};
    EXPECT_THROW(condition_A_report(f, 1.0, g, none), ConfigError);
    EXPECT_THROW(condition_A_report(f, 0.5, g, one), DomainError);
    EXPECT_THROW(condition_A_report(f, 1.0, Grid(1e-2, 3.0), one), ConfigError);
    const std::vector<double> bad = {0.5, 1.5};
    EXPECT_THROW(condition_A_report(f, 1.0, g, bad), DomainError);
}

TEST(ConditionA, RefinementStabilityWhenFinite)
{
    const auto f = ForcingFunction::osc_growth(1.0, 3.0);
    const Grid g(2e-3, 12.0);
    const auto coarse = condition_A_report(f, 1.0, g, uniform_theta_grid(16));
    const auto fine = condition_A_report(f, 1.0, g, uniform_theta_grid(32));
    ASSERT_EQ(coarse.classification, Membership::finite);
    EXPECT_LE(std::abs(fine.sup_phi - coarse.sup_phi) / coarse.sup_phi, 0.05);
}

TEST(Decomposition, PiecesFiniteWhenAveragesFinite)
{
    struct Case {
        ForcingFunction f;
        double p;
        Grid grid;
    };
    const std::vector<Case> cases = {{ForcingFunction::exp_decay(1.0), 1.0, Grid(1e-3, 20.0)},
                                     {ForcingFunction::osc_growth(1.0, 2.0), 2.0, Grid(1e-3, 12.0)},
                                     {ForcingFunction::inverse_linear(), 2.0, Grid(1e-2, 200.0)}};
    for (const auto& c : cases) {
        const auto rep = condition_A_report(c.f, c.p, c.grid, uniform_theta_grid());
        ASSERT_EQ(rep.classification, Membership::finite) << c.f.describe();
        const auto d = decompose(c.f, c.grid, nullptr, 0.0);
        EXPECT_EQ(classify_membership(d.f1, c.p), Membership::finite) << c.f.describe();
        EXPECT_EQ(classify_membership(d.f3, c.p), Membership::finite) << c.f.describe();
    }
}
