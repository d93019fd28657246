#include "swcbc/errors.hpp"
#include "swcbc/schemes.hpp"
#include "swcbc/studies.hpp"
#include "swcbc/time_integration.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace swcbc;
using namespace swcbc::schemes;

namespace {

const Variant kVariants[] = {Variant::SupercriticalDirect, Variant::SupercriticalHomogenized,
                             Variant::SubcriticalDirect, Variant::SubcriticalDiagonal,
                             Variant::Dimensional};

} // namespace

TEST(Riemann, RoundTripProperty)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> E(-0.6, 3.0), U(-3.0, 3.0);
    for (const auto& p : {PhysicalParams::nondimensional(1.0, 1.0),
                          PhysicalParams::nondimensional(0.0, 0.0),
                          PhysicalParams::nondimensional(-0.3, 0.2)}) {
        for (int i = 0; i < 2000; ++i) {
            const double eta = E(rng), u = U(rng);
            const auto inv = riemann_forward(eta, u, p);
            const auto back = riemann_inverse(inv.v, inv.w, p);
            EXPECT_NEAR(back.eta, eta, 1e-13);
            EXPECT_NEAR(back.u, u, 1e-13);
            const auto again = riemann_forward(back.eta, back.u, p);
            EXPECT_NEAR(again.v, inv.v, 1e-13);
            EXPECT_NEAR(again.w, inv.w, 1e-13);
        }
    }
}

TEST(Riemann, FarFieldMapsToZeroAndSpeedsMatch)
{
    const auto p = PhysicalParams::nondimensional(1.0, 1.0);
    const auto z = riemann_forward(1.0, 1.0, p);
    EXPECT_NEAR(z.v, 0.0, 1e-15);
    EXPECT_NEAR(z.w, 0.0, 1e-15);
    const auto inv = riemann_forward(0.4, 0.7, p);
    const auto sp = wave_speeds(inv.v, inv.w, p);
    EXPECT_NEAR(sp.lambda1, 0.7 + std::sqrt(1.4), 1e-14);
    EXPECT_NEAR(sp.lambda2, 0.7 - std::sqrt(1.4), 1e-14);
    EXPECT_THROW(riemann_forward(-1.5, 0.0, p), DryState);
}

TEST(Params, ConstantsAndRegimes)
{
    const auto sup = PhysicalParams::nondimensional(1.0, 3.0);
    EXPECT_TRUE(sup.is_supercritical());
    EXPECT_NEAR(sup.delta0, std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(PhysicalParams::nondimensional(1.0, 1.0).is_subcritical());
    EXPECT_THROW(PhysicalParams::nondimensional(-1.0, 0.0), DryState);
    const auto d = PhysicalParams::dimensional(9.8, 0.2, 1.0, 0.2, 0.0);
    EXPECT_NEAR(d.a_plus(), 2.0 * std::sqrt(9.8 * 0.2), 1e-14);
    EXPECT_NEAR(d.b_minus(), -std::sqrt(9.8 / 0.2) * 0.2, 1e-14);
    EXPECT_THROW(PhysicalParams::dimensional(9.8, 0.0, 1.0, 0.2, 0.0), ConfigError);
}

TEST(Params, VariantSpellingsRoundTrip)
{
    for (auto v : kVariants) {
        EXPECT_EQ(parse_variant(to_string(v)), v);
    }
    for (auto m : {BcMode::NonlinearCharacteristic, BcMode::LinearizedCharacteristic}) {
        EXPECT_EQ(parse_bc_mode(to_string(m)), m);
    }
    EXPECT_EQ(parse_coupling("frozen"), BoundaryCoupling::Frozen);
    EXPECT_THROW(parse_variant("transcritical"), ConfigError);
}

TEST(BoundaryRelations, HoldIncomingInvariantAtFarField)
{
    const auto p = PhysicalParams::nondimensional(1.0, 1.0);
    for (double eta : {0.5, 1.0, 1.7}) {
        const double uL = characteristic_bc_u(eta, Side::Left, p);
        const double uR = characteristic_bc_u(eta, Side::Right, p);
        EXPECT_NEAR(riemann_forward(eta, uL, p).v, 0.0, 1e-14);
        EXPECT_NEAR(riemann_forward(eta, uR, p).w, 0.0, 1e-14);
        EXPECT_NEAR(linearized_bc_u(eta, Side::Left, p) + linearized_bc_u(eta, Side::Right, p),
                    2.0 * p.u0, 1e-14);
    }
    const auto d = PhysicalParams::dimensional(9.8, 0.2, 1.0, 0.2, 0.0);
    EXPECT_NEAR(dimensional_bc_u(0.2, Side::Left, d, BcMode::NonlinearCharacteristic), 0.0, 1e-14);
    EXPECT_NEAR(dimensional_bc_u(0.2, Side::Right, d, BcMode::LinearizedCharacteristic), 0.0, 1e-14);
}

class PerVariant : public ::testing::TestWithParam<Variant> {};

TEST_P(PerVariant, SteadyFarFieldIsExact)
{
    const auto cfg = oracles::config_for(GetParam());
    const auto mesh = oracles::mesh_for(GetParam(), 40);
    const SemiDiscreteOperator op(cfg, mesh);
    auto s = oracles::rest_state(cfg, mesh);
    const auto d = op.derivative(s);
    for (std::size_t i = 0; i < d.first.size(); ++i) {
        EXPECT_LE(std::abs(d.first[i]), 1e-12);
        EXPECT_LE(std::abs(d.second[i]), 1e-12);
    }
    const auto r = timeint::integrate(op, s, timeint::TimeGrid::make(0.0, 0.1, 0.005));
    ASSERT_TRUE(r.status.completed);
    for (std::size_t i = 0; i < s.first.size(); ++i) {
        EXPECT_LE(std::abs(r.final_state.first[i] - s.first[i]), 1e-12);
        EXPECT_LE(std::abs(r.final_state.second[i] - s.second[i]), 1e-12);
    }
}

TEST_P(PerVariant, AssemblyMatchesSymbolicOracle)
{
    std::mt19937 rng(3);
    const auto cfg = oracles::config_for(GetParam());
    for (int N = 2; N <= 4; ++N) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto s = oracles::random_state(cfg, oracles::mesh_for(GetParam(), N), rng);
            const auto got = assemble_loads(s, cfg);
            const auto want = oracles::symbolic_loads(s, cfg);
            for (std::size_t i = 0; i < want.first.size(); ++i) {
                EXPECT_NEAR(got.first[i], want.first[i], 1e-13);
                EXPECT_NEAR(got.second[i], want.second[i], 1e-13);
            }
        }
    }
}

TEST_P(PerVariant, DerivativeSolvesTheMassSystem)
{
    // M d = L on every row that is not closed algebraically.
    std::mt19937 rng(5);
    const auto cfg = oracles::config_for(GetParam());
    const auto mesh = oracles::mesh_for(GetParam(), 12);
    const auto s = oracles::random_state(cfg, mesh, rng);
    const auto d = SemiDiscreteOperator(cfg, mesh).derivative(s);
    const auto L = assemble_loads(s, cfg);
    const auto M = fem::assemble_mass_matrix(mesh, fem::BoundaryMask::none());
    const auto Md1 = M.multiply(d.first.coeffs);
    const auto Md2 = M.multiply(d.second.coeffs);
    const std::size_t n = Md1.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        EXPECT_NEAR(Md1[i], L.first[i], 1e-12) << i;
        EXPECT_NEAR(Md2[i], L.second[i], 1e-12) << i;
    }
}

INSTANTIATE_TEST_SUITE_P(AllVariants, PerVariant, ::testing::ValuesIn(kVariants),
                         [](const auto& info) {
                             std::string s(to_string(info.param));
                             for (auto& ch : s) {
                                 if (ch == '-') {
                                     ch = '_';
                                 }
                             }
                             return s;
                         });

TEST(Coupling, BoundaryRatesFollowTheClosure)
{
    std::mt19937 rng(9);
    for (auto mode : {BcMode::NonlinearCharacteristic, BcMode::LinearizedCharacteristic}) {
        auto cfg = oracles::config_for(Variant::SubcriticalDirect);
        cfg.bc_mode = mode;
        const fem::UniformMesh mesh(0.0, 1.0, 10);
        auto s = oracles::random_state(cfg, mesh, rng);
        SemiDiscreteOperator(cfg, mesh).close_boundary(s);

        cfg.coupling = BoundaryCoupling::Consistent;
        const auto dc = SemiDiscreteOperator(cfg, mesh).derivative(s);
        cfg.coupling = BoundaryCoupling::Frozen;
        const auto df = SemiDiscreteOperator(cfg, mesh).derivative(s);

        EXPECT_EQ(dc.first.coeffs, df.first.coeffs);
        EXPECT_EQ(df.second.front(), 0.0);
        EXPECT_EQ(df.second.back(), 0.0);

        // Differentiate the closure u_b = closure(eta_b) by a centred difference.
        const auto& p = cfg.params;
        auto closure = [&](double eta, Side side) {
            return mode == BcMode::NonlinearCharacteristic ? characteristic_bc_u(eta, side, p)
                                                           : linearized_bc_u(eta, side, p);
        };
        const double e = 1e-6;
        const double slopeL = (closure(s.first.front() + e, Side::Left) -
                               closure(s.first.front() - e, Side::Left)) / (2 * e);
        const double slopeR = (closure(s.first.back() + e, Side::Right) -
                               closure(s.first.back() - e, Side::Right)) / (2 * e);
        EXPECT_NEAR(dc.second.front(), slopeL * dc.first.front(), 1e-8);
        EXPECT_NEAR(dc.second.back(), slopeR * dc.first.back(), 1e-8);
    }
}

TEST(Operator, RejectsMismatchedState)
{
    const auto cfg = oracles::config_for(Variant::SubcriticalDiagonal);
    const fem::UniformMesh mesh(0.0, 1.0, 8);
    const SemiDiscreteOperator op(cfg, mesh);
    const SchemeState eta_u(StateKind::EtaU, fem::NodalField(mesh), fem::NodalField(mesh));
    EXPECT_THROW(op.derivative(eta_u), ConfigError);
    const fem::UniformMesh other(0.0, 1.0, 9);
    const SchemeState vw(StateKind::VW, fem::NodalField(other), fem::NodalField(other));
    EXPECT_THROW(op.derivative(vw), InvalidMesh);
}

TEST(Operator, DryStateIsReported)
{
    auto cfg = oracles::config_for(Variant::Dimensional);
    const fem::UniformMesh mesh(-1.0, 1.0, 8);
    auto s = oracles::rest_state(cfg, mesh);
    s.first[3] = -0.01;
    EXPECT_THROW(SemiDiscreteOperator(cfg, mesh).derivative(s), DryState);
}

TEST(Diagnostics, CriticalityAndEnergy)
{
    const fem::UniformMesh mesh(0.0, 1.0, 10);
    const auto sup = oracles::config_for(Variant::SupercriticalDirect);
    EXPECT_NEAR(criticality_monitor(oracles::rest_state(sup, mesh), sup), 3.0 - std::sqrt(2.0), 1e-14);
    const auto sub = oracles::config_for(Variant::SubcriticalDiagonal);
    EXPECT_NEAR(criticality_monitor(oracles::rest_state(sub, mesh), sub), 1.0 - std::sqrt(2.0), 1e-14);

    const SchemeState pert(StateKind::EtaU, fem::NodalField(mesh, 0.2), fem::NodalField(mesh, 0.1));
    EXPECT_NEAR(energy_integral(pert, sub.params), 0.01 + 0.04 / 2.0, 1e-14);
}

TEST(Diagnostics, ToPhysicalUndoesTheVariables)
{
    const fem::UniformMesh mesh(0.0, 1.0, 6);
    const auto diag = oracles::config_for(Variant::SubcriticalDiagonal);
    const auto phys = to_physical(oracles::rest_state(diag, mesh), diag);
    EXPECT_NEAR(phys.first[2], 1.0, 1e-15);
    EXPECT_NEAR(phys.second[2], 1.0, 1e-15);
    const auto hom = oracles::config_for(Variant::SupercriticalHomogenized);
    const auto ph = to_physical(oracles::rest_state(hom, mesh), hom);
    EXPECT_NEAR(ph.first[4], 1.0, 1e-15);
    EXPECT_NEAR(ph.second[4], 3.0, 1e-15);
}
