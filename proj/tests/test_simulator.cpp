#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "config.hpp"
#include "experiment.hpp"
#include "simulator.hpp"

using namespace dic;

namespace {

// u = 0 regardless of state.
Controller null_twisting()
{
    return Controller(ControllerType::Twisting, GainSet{1e-300, 1e-300, 0.0, 0.0});
}

Trajectory run_bundled(const std::string& name, double h, double t_end)
{
    RunConfig c = parse_config(bundled_config_text(name));
    c.sim.h = h;
    c.sim.t_end = t_end;
    return simulate_config(c);
}

}  // namespace

TEST(SimConfig, Validation)
{
    EXPECT_THROW((SimConfig{0.0, 1.0}).validate(), std::invalid_argument);
    EXPECT_THROW((SimConfig{0.1, -1.0}).validate(), std::invalid_argument);
    EXPECT_THROW((SimConfig{0.1, 1.0, Method::ExplicitEuler, 0}).validate(), std::invalid_argument);
    EXPECT_EQ((SimConfig{0.1, 1.0}).steps(), 10u);
    EXPECT_EQ(method_from_string("rk4"), Method::Rk4);
    EXPECT_THROW(method_from_string("midpoint"), std::invalid_argument);
}

TEST(Simulate, EulerOnFreeDoubleIntegrator)
{
    const SimConfig cfg{0.1, 1.0};
    const Trajectory tr = simulate(make_double_integrator().dynamics(), null_twisting(),
                                   Perturbation::zero(), {0.0, 1.0}, {}, cfg);
    ASSERT_EQ(tr.size(), 11u);
    EXPECT_NEAR(tr.x1.back(), 1.0, 1e-15);
    EXPECT_EQ(tr.x2.back(), 1.0);
    EXPECT_DOUBLE_EQ(tr.t.back(), 1.0);
}

TEST(Simulate, UniformTimeGridAndStride)
{
    const SimConfig cfg{0.01, 1.0, Method::ExplicitEuler, 7};
    const Trajectory tr = simulate(make_double_integrator().dynamics(),
                                   Controller(ControllerType::DicStateFeedback, {2.0, 5.0, 0.5, 0.0}),
                                   Perturbation::zero(), {1.0, 0.0}, {}, cfg);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(tr.t[i], static_cast<double>(i * 7) * 0.01);
    }
    EXPECT_EQ(tr.x1.size(), tr.size());
    EXPECT_EQ(tr.u.size(), tr.size());
    EXPECT_TRUE(tr.xhat1.empty());
}

TEST(Simulate, Deterministic)
{
    const auto a = run_bundled("of_pendulum", 1e-3, 10.0);
    const auto b = run_bundled("of_pendulum", 1e-3, 10.0);
    EXPECT_EQ(a, b);
    EXPECT_EQ(to_csv(a), to_csv(b));
}

TEST(Simulate, NumericFailureReportsTime)
{
    const SimConfig cfg{0.1, 10.0};
    try {
        simulate(make_double_integrator().dynamics(), null_twisting(),
                 Perturbation::constant(1e308), {0.0, 0.0}, {}, cfg);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_GT(e.step(), 0u);
        EXPECT_GT(e.time(), 0.0);
    }
}

TEST(Simulate, FrozenOriginIsFixedPoint)
{
    const SimConfig cfg{1e-3, 2.0};
    const Trajectory tr = simulate(make_double_integrator().dynamics(),
                                   Controller(ControllerType::DicStateFeedback, {2.0, 5.0, 0.5, 0.0}),
                                   Perturbation::constant(0.3), {0.0, 0.0}, {-0.3, {0.0, 0.0}}, cfg);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(tr.x1[i], 0.0);
        EXPECT_EQ(tr.x2[i], 0.0);
        EXPECT_EQ(tr.z[i], -0.3);
    }
}

TEST(Simulate, PendulumEnergyDriftRk4)
{
    const PendulumParams p;
    const SimConfig cfg{1e-3, 10.0, Method::Rk4};
    const Trajectory tr = simulate(make_pendulum(p).dynamics(), null_twisting(),
                                   Perturbation::zero(), {1.0, 0.5}, {}, cfg);
    auto energy = [&](std::size_t i) {
        return 0.5 * p.m * p.l * p.l * tr.x2[i] * tr.x2[i] + p.m * p.g * p.l * (1.0 - std::cos(tr.x1[i]));
    };
    const double e0 = energy(0);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        worst = std::max(worst, std::fabs(energy(i) - e0) / e0);
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(Simulate, StepRefinementIsFirstOrder)
{
    // Smooth transient: no perturbation, state far from the switching set.
    const Controller c(ControllerType::DicStateFeedback, {2.0, 5.0, 0.5, 0.0});
    auto at = [&](double h) {
        const Trajectory tr = simulate(make_double_integrator().dynamics(), c, Perturbation::zero(),
                                       {2.0, 2.0}, {}, SimConfig{h, 0.2});
        return State2{tr.x1.back(), tr.x2.back()};
    };
    const State2 a = at(1e-3), b = at(5e-4), r = at(1e-5);
    const double ea = std::hypot(a[0] - r[0], a[1] - r[1]);
    const double eb = std::hypot(b[0] - r[0], b[1] - r[1]);
    EXPECT_NEAR(ea / eb, 2.0, 0.2);
}

TEST(Csv, HeaderAndRoundTrip)
{
    const auto tr = run_bundled("sf_pendulum", 1e-2, 0.05);
    const std::string csv = to_csv(tr);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x1,x2,xhat1,xhat2,z,u,rho");
    std::getline(in, line);
    EXPECT_EQ(line, "0,2,2,,,0,-9.590909911655222,0");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        EXPECT_EQ(std::stod(line.substr(c1 + 1, c2 - c1 - 1)), tr.x1[rows]);
    }
    EXPECT_EQ(rows + 1, tr.size());
}

TEST(Settling, ZeroTrajectory)
{
    const Trajectory tr = simulate(make_double_integrator().dynamics(), null_twisting(),
                                   Perturbation::zero(), {0.0, 0.0}, {}, SimConfig{0.01, 1.0});
    const auto s = settling_metrics(tr);
    ASSERT_TRUE(s.settle_time);
    EXPECT_EQ(*s.settle_time, 0.0);
    EXPECT_EQ(s.sup_x1, 0.0);
    EXPECT_EQ(s.sup_x2, 0.0);
}

TEST(Settling, DivergentNeverSettles)
{
    const Trajectory tr = simulate(make_double_integrator().dynamics(), null_twisting(),
                                   Perturbation::constant(1.0), {0.0, 0.0}, {}, SimConfig{0.01, 5.0});
    EXPECT_FALSE(settling_metrics(tr).settle_time);
}

TEST(Chattering, ConstantControl)
{
    const Trajectory tr = simulate(make_double_integrator().dynamics(), null_twisting(),
                                   Perturbation::zero(), {0.0, 0.0}, {}, SimConfig{0.01, 1.0});
    const auto c = chattering_metric(tr);
    EXPECT_EQ(c.max_step_jump, 0.0);
    EXPECT_EQ(c.sign_flip_fraction, 0.0);
}

TEST(Precision, DegenerateOnExactZeroDynamics)
{
    const Controller c(ControllerType::DicStateFeedback, {2.0, 5.0, 0.5, 0.0});
    auto run = [&](double h) {
        return simulate(make_double_integrator().dynamics(), c, Perturbation::zero(), {0.0, 0.0}, {},
                        SimConfig{h, 5.0});
    };
    const double steps[] = {1e-2, 1e-3, 1e-4};
    const auto s = precision_scaling_study(run, steps);
    EXPECT_TRUE(s.degenerate);
    EXPECT_TRUE(std::isnan(s.slope_x1));
}

TEST(Precision, RequiresSpread)
{
    auto run = [](double) { return Trajectory{}; };
    const double narrow[] = {1e-3, 2e-3, 3e-3};
    EXPECT_THROW(precision_scaling_study(run, narrow), std::invalid_argument);
    const double two[] = {1e-2, 1e-4};
    EXPECT_THROW(precision_scaling_study(run, two), std::invalid_argument);
}

TEST(Precision, FitSlope)
{
    const double x[] = {1.0, 2.0, 3.0};
    const double y[] = {2.0, 5.0, 8.0};
    EXPECT_DOUBLE_EQ(fit_slope(x, y), 3.0);
}
