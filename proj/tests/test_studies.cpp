#include "swcbc/errors.hpp"
#include "swcbc/studies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace swcbc;
using namespace swcbc::studies;

namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

schemes::SchemeConfig supercritical_cfg()
{
    schemes::SchemeConfig cfg;
    cfg.params = schemes::PhysicalParams::nondimensional(1.0, 3.0);
    return cfg;
}

} // namespace

TEST(Studies, ObservedOrder)
{
    EXPECT_NEAR(observed_order(4e-3, 1e-3, 40, 80), 2.0, 1e-14);
    EXPECT_NEAR(observed_order(1.0, 1.0 / 81.0, 1, 3), 4.0, 1e-14);
}

TEST(Studies, ShortConvergenceRunIsSecondOrder)
{
    const auto c = mms_catalog("supercritical");
    const auto table = run_convergence(c, {20, 40}, 10.0, 0.2);
    ASSERT_EQ(table.rows.size(), 2u);
    EXPECT_FALSE(table.rows[0].order_first.has_value());
    EXPECT_NEAR(*table.rows[1].order_first, 2.0, 0.1);
    EXPECT_NEAR(*table.rows[1].order_second, 2.0, 0.1);
}

TEST(Studies, RerunsAreBitIdenticalAcrossJobCounts)
{
    const auto c = mms_catalog("subcritical_direct");
    StudyOptions one;
    StudyOptions many;
    many.jobs = 3;
    const auto a = run_convergence(c, {10, 20, 30}, 10.0, 0.1, one);
    const auto b = run_convergence(c, {10, 20, 30}, 10.0, 0.1, many);
    const auto again = run_convergence(c, {10, 20, 30}, 10.0, 0.1, one);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_TRUE(bit_equal(a.rows[i].error_first, b.rows[i].error_first));
        EXPECT_TRUE(bit_equal(a.rows[i].error_second, b.rows[i].error_second));
        EXPECT_TRUE(bit_equal(a.rows[i].error_first, again.rows[i].error_first));
    }
}

TEST(Studies, TemporalOrderTableShape)
{
    const auto c = mms_catalog("supercritical");
    const auto t = run_temporal_order(c, 10, {5, 10}, 40, 0.1);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(t.k_ref, 0.1 / 40);
    EXPECT_FALSE(t.rows[0].order.has_value());
    EXPECT_GT(*t.rows[1].order, 3.5);
}

TEST(Studies, InitialStatesHonourTheClosure)
{
    const fem::UniformMesh mesh(0.0, 1.0, 20);
    schemes::SchemeConfig diag;
    diag.variant = schemes::Variant::SubcriticalDiagonal;
    diag.params = schemes::PhysicalParams::nondimensional(1.0, 1.0);
    const auto s = make_initial_state(diag, mesh, gaussian_pulse(1.0, 0.1, 1.0, 0.05, 400, 0.02));
    EXPECT_EQ(s.first.front(), 0.0);
    EXPECT_EQ(s.second.back(), 0.0);

    auto sub = diag;
    sub.variant = schemes::Variant::SubcriticalDirect;
    const auto d = make_initial_state(sub, mesh, gaussian_pulse(1.0, 0.1, 1.0, 0.05));
    EXPECT_NEAR(d.second.front(),
                schemes::characteristic_bc_u(d.first.front(), schemes::Side::Left, sub.params), 1e-15);
}

TEST(Studies, InitialProfiles)
{
    const auto hs = half_sine_pulse(0.2, 0.05, 0.3);
    EXPECT_NEAR(hs.first(0.0), 0.25, 1e-15);
    EXPECT_EQ(hs.first(0.5), 0.2);
    EXPECT_EQ(hs.second(0.1), 0.0);
    const auto g = gaussian_pulse(1.0, 0.05, 3.0, 0.1);
    EXPECT_DOUBLE_EQ(g.first(0.5), 1.05);
    EXPECT_DOUBLE_EQ(g.second(0.5), 3.1);
    const auto F = impulse_forcing(2.0);
    EXPECT_DOUBLE_EQ(F(0.0, 0.5), 2.0);
    EXPECT_EQ(F(0.2, 0.5), 0.0);
    EXPECT_EQ(F(0.0, 1.5), 0.0);
}

TEST(Studies, AbsorptionOfARestStateIsFlat)
{
    const auto cfg = supercritical_cfg();
    const fem::UniformMesh mesh(0.0, 1.0, 50);
    const auto init = make_initial_state(cfg, mesh, uniform_state(1.0, 3.0));
    const auto h = run_absorption(cfg, init, timeint::TimeGrid::make(0.0, 0.1, 0.002), 0.05, true);
    ASSERT_EQ(h.samples.size(), 3u);
    for (const auto& s : h.samples) {
        EXPECT_LE(s.dev_first, 1e-12);
        EXPECT_LE(s.dev_second, 1e-12);
        EXPECT_GT(s.criticality, 0.0);
        EXPECT_LE(*s.energy, 1e-20);
    }
    EXPECT_DOUBLE_EQ(h.at(0.06).t, 0.05);
    EXPECT_THROW(ResidualHistory{}.at(0.0), ConfigError);
}

TEST(Studies, StabilitySweepRecordsBlowUpAsAMeasurement)
{
    const auto cfg = supercritical_cfg();
    const fem::UniformMesh mesh(0.0, 1.0, 100);
    const auto sweep = run_stability_sweep(cfg, mesh, gaussian_pulse(1.0, 0.05, 3.0, 0.1),
                                           {0.1, 0.37, 2.0}, 0.2, 1.0);
    ASSERT_EQ(sweep.entries.size(), 3u);
    EXPECT_TRUE(sweep.entries[0].stable);
    EXPECT_FALSE(sweep.entries[2].stable);
    EXPECT_TRUE(std::isinf(sweep.entries[2].measure));
    EXPECT_TRUE(sweep.entries[2].blew_up_at.has_value());
    // The step used divides T and does not exceed the requested ratio.
    const auto& e = sweep.entries[1];
    EXPECT_LE(e.k, 0.37 * mesh.h() * (1 + 1e-12));
    EXPECT_NEAR(0.2 / e.k, std::round(0.2 / e.k), 1e-9);
    ASSERT_TRUE(sweep.largest_stable.has_value());
}

TEST(Studies, ReflectionNeedsTwoClosures)
{
    schemes::SchemeConfig cfg;
    cfg.variant = schemes::Variant::SubcriticalDirect;
    cfg.params = schemes::PhysicalParams::nondimensional(1.0, 1.0);
    const fem::UniformMesh mesh(0.0, 1.0, 20);
    EXPECT_THROW(run_reflection_experiment(cfg, cfg, mesh, uniform_state(1.0, 1.0),
                                           timeint::TimeGrid::make(0.0, 0.1, 0.01), {}, 0.0, {}),
                 ConfigError);
}

TEST(Studies, DiagonalErrorMeasures)
{
    // The invariant measure is exactly twice the invariant L2 errors.
    const auto c = mms_catalog("subcritical_diagonal");
    const fem::UniformMesh mesh(0.0, 1.0, 16);
    const auto s = make_initial_state(c.cfg, mesh, exact_initial_data(c));
    const auto inv = mms_errors(c, s, Reconstruction::Invariants);
    const auto rule = fem::gauss_rule(5);
    EXPECT_NEAR(inv.first, 2 * fem::l2_error(s.first, [&](double x) { return c.exact_first(x, 0.0); }, rule), 1e-15);
    EXPECT_NEAR(inv.second, 2 * fem::l2_error(s.second, [&](double x) { return c.exact_second(x, 0.0); }, rule), 1e-15);
    const auto pw = mms_errors(c, s, Reconstruction::Pointwise);
    const auto nodal = mms_errors(c, s, Reconstruction::Nodal);
    EXPECT_GT(pw.first, 0.0);
    EXPECT_GT(nodal.first, 0.0);
}
