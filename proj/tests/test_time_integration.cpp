#include "swcbc/errors.hpp"
#include "swcbc/studies.hpp"
#include "swcbc/time_integration.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace swcbc;
using namespace swcbc::timeint;

namespace {

// y' = f(t, y) from 0 to T with M classical (or printed) steps.
template <class F>
double march(const F& f, double y0, double T, int M, Rk4Form form = Rk4Form::Classical)
{
    double y = y0;
    const double k = T / M;
    for (int n = 0; n < M; ++n) {
        y = rk4_step(f, y, n * k, k, form);
    }
    return y;
}

double order_between(double e1, double e2) { return std::log2(e1 / e2); }

} // namespace

TEST(Rk4, OneStepOfExponentialGrowth)
{
    const double y = rk4_step([](double, double y) { return y; }, 1.0, 0.0, 0.1);
    EXPECT_NEAR(y, 1.1051708333, 1e-10);
    EXPECT_NEAR(y, 1.0 + 0.1 + 0.005 + 0.1 * 0.1 * 0.1 / 6 + 0.1 * 0.1 * 0.1 * 0.1 / 24, 1e-15);
}

TEST(Rk4, MeasuredOrderOnNonAutonomousProblem)
{
    // y' = cos(t) y, y(0) = 1, exact y = exp(sin t).
    const auto f = [](double t, double y) { return std::cos(t) * y; };
    const double exact = std::exp(std::sin(2.0));
    double prev = 0.0;
    for (int M : {10, 20, 40, 80}) {
        const double e = std::abs(march(f, 1.0, 2.0, M) - exact);
        if (prev > 0.0) {
            EXPECT_GE(order_between(prev, e), 3.9) << "M = " << M;
        }
        prev = e;
    }
}

TEST(Rk4, PrintedFormIsOnlySecondOrderWhenTimeDependent)
{
    const auto f = [](double t, double y) { return std::cos(t) * y; };
    const double exact = std::exp(std::sin(2.0));
    const double e1 = std::abs(march(f, 1.0, 2.0, 40, Rk4Form::AsPrinted) - exact);
    const double e2 = std::abs(march(f, 1.0, 2.0, 80, Rk4Form::AsPrinted) - exact);
    const double p = order_between(e1, e2);
    EXPECT_GT(p, 1.7);
    EXPECT_LT(p, 2.5);
    // Autonomous problems cannot tell the two forms apart.
    const auto g = [](double, double y) { return -y * y; };
    EXPECT_DOUBLE_EQ(march(g, 1.0, 1.0, 10, Rk4Form::AsPrinted), march(g, 1.0, 1.0, 10));
}

TEST(Rk4, NonFiniteStageThrows)
{
    const auto f = [](double, double) { return std::numeric_limits<double>::infinity(); };
    EXPECT_THROW(rk4_step(f, 1.0, 0.0, 0.1), NonFinite);
}

TEST(TimeGrid, DivisibilityAndEndpoints)
{
    const auto g = TimeGrid::make(0.0, 1.0, 0.1);
    EXPECT_EQ(g.M, 10);
    EXPECT_EQ(g.time(10), 1.0);
    EXPECT_THROW(TimeGrid::make(0.0, 1.0, 0.3), ConfigError);
    EXPECT_THROW(TimeGrid::make(0.0, 1.0, 0.0), ConfigError);
    EXPECT_THROW(TimeGrid::make(1.0, 1.0, 0.1), ConfigError);
    const auto w = TimeGrid::with_steps(0.0, 1.0, 3);
    EXPECT_DOUBLE_EQ(w.k, 1.0 / 3);
    EXPECT_THROW(TimeGrid::with_steps(0.0, 1.0, 0), ConfigError);
}

TEST(Integrate, ObserversSampleOnTheGrid)
{
    const auto c = studies::mms_catalog("supercritical");
    const fem::UniformMesh mesh(0.0, 1.0, 10);
    const auto init = studies::make_initial_state(c.cfg, mesh, studies::exact_initial_data(c));
    Observer every{"every", 0.05, [](const schemes::SchemeState& s) {
                       return std::vector<double>{s.first[3]};
                   }, {}};
    Observer listed{"listed", 0.0, [](const schemes::SchemeState& s) {
                        return std::vector<double>{s.t};
                    }, {0.0, 0.07, 0.1}};
    const auto r = integrate(c.cfg, init, TimeGrid::make(0.0, 0.1, 0.01), {every, listed});
    ASSERT_TRUE(r.status.completed);
    EXPECT_EQ(r.steps_taken, 10);
    EXPECT_EQ(r.series("every").t.size(), 3u);
    EXPECT_EQ(r.series("listed").t, (std::vector<double>{0.0, 0.07, 0.1}));
    EXPECT_THROW(r.series("missing"), ConfigError);

    Observer off{"off", 0.015, every.sample, {}};
    EXPECT_THROW(integrate(c.cfg, init, TimeGrid::make(0.0, 0.1, 0.01), {off}), ConfigError);
}

TEST(Integrate, BlowUpEndsTheRunWithStatus)
{
    // Far beyond the stable Courant ratio on a coarse mesh.
    schemes::SchemeConfig cfg;
    cfg.params = schemes::PhysicalParams::nondimensional(1.0, 3.0);
    const fem::UniformMesh mesh(0.0, 1.0, 100);
    const auto init =
        studies::make_initial_state(cfg, mesh, studies::gaussian_pulse(1.0, 0.05, 3.0, 0.1));
    const auto r = integrate(cfg, init, TimeGrid::make(0.0, 1.0, 0.01));
    EXPECT_FALSE(r.status.completed);
    EXPECT_GT(r.status.blew_up_at, 0.0);
    EXPECT_TRUE(all_finite(r.final_state));
}
