#pragma once

#include "swcbc/fem.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace swcbc::schemes {

/// Far-field constants. The nondimensional block (eta0, u0, delta0) drives the [0,1]
/// schemes; the dimensional block drives the (h, u) channel problem on [-L, L].
struct PhysicalParams
{
    double eta0 = 0.0;
    double u0 = 0.0;
    double delta0 = 1.0; // sqrt(1 + eta0)

    double g = 9.8;
    double H = 0.2;
    double L = 1.0;
    double h0 = 0.2;

    /// Throws DryState if 1 + eta0 <= 0.
    static PhysicalParams nondimensional(double eta0, double u0);
    /// Throws ConfigError unless g, H, h0, L > 0.
    static PhysicalParams dimensional(double g, double H, double L, double h0, double u0);

    /// Nonlinear characteristic constants u0 +- 2 sqrt(g h0).
    double a_plus() const;
    double a_minus() const;
    /// Linearized constants u0 +- sqrt(g/H) h0.
    double b_plus() const;
    double b_minus() const;

    bool is_supercritical() const { return u0 > delta0; }
    bool is_subcritical() const { return u0 < delta0 && u0 > -delta0; }
};

enum class StateKind { EtaU, VW, DimensionalHU };

enum class Variant {
    SupercriticalDirect,
    SupercriticalHomogenized,
    SubcriticalDirect,
    SubcriticalDiagonal,
    Dimensional,
};

enum class BcMode { NonlinearCharacteristic, LinearizedCharacteristic };

enum class Side { Left, Right };

/// How the momentum equation of the variants with an algebraic u closure treats the
/// boundary values of u. `Consistent` keeps the mass-matrix coupling between the first
/// interior node and the moving boundary value, whose rate follows from differentiating the
/// closure. `Frozen` tests with u restricted to S_h,0, dropping that coupling; it is
/// first-order accurate whenever a boundary value of u changes in time.
enum class BoundaryCoupling { Consistent, Frozen };

std::string_view to_string(Variant v);
std::string_view to_string(BcMode m);
Variant parse_variant(std::string_view s);
BcMode parse_bc_mode(std::string_view s);
std::string_view to_string(BoundaryCoupling c);
BoundaryCoupling parse_coupling(std::string_view s);

/// State kind a variant evolves.
StateKind state_kind(Variant v);

using SpaceTimeFunction = std::function<double(double x, double t)>;

/// Source terms added to the right-hand side of the two evolution equations, i.e. the
/// PDEs read  first_t + ... = first(x,t),  second_t + ... = second(x,t).
struct Forcing
{
    SpaceTimeFunction first;
    SpaceTimeFunction second;
};

struct SchemeConfig
{
    Variant variant = Variant::SupercriticalDirect;
    BcMode bc_mode = BcMode::NonlinearCharacteristic;
    BoundaryCoupling coupling = BoundaryCoupling::Consistent;
    PhysicalParams params;
    std::optional<Forcing> forcing;
    /// F(x,t) entering the dimensional momentum equation as -F/h.
    SpaceTimeFunction momentum_impulse;
};

struct SchemeState
{
    StateKind kind = StateKind::EtaU;
    fem::NodalField first;
    fem::NodalField second;
    double t = 0.0;

    SchemeState(StateKind k, fem::NodalField a, fem::NodalField b, double time = 0.0);

    const fem::UniformMesh& mesh() const { return first.mesh; }
};

/// y += a * x, componentwise over both fields (t is left alone).
void add_scaled(SchemeState& y, double a, const SchemeState& x);

struct Invariants
{
    double v;
    double w;
};

struct Physical
{
    double eta;
    double u;
};

struct WaveSpeeds
{
    double lambda1;
    double lambda2;
};

/// v = (u - u0 + 2(sqrt(1+eta) - delta0))/2, w = (u - u0 - 2(sqrt(1+eta) - delta0))/2.
/// Throws DryState if 1 + eta <= 0.
Invariants riemann_forward(double eta, double u, const PhysicalParams& p);
/// eta = ((v - w)/2 + delta0)^2 - 1, u = v + w + u0. Throws DryState if (v-w)/2 + delta0 <= 0.
Physical riemann_inverse(double v, double w, const PhysicalParams& p);
WaveSpeeds wave_speeds(double v, double w, const PhysicalParams& p);

/// u at a boundary node from the nonlinear characteristic relation (incoming invariant
/// held at its far-field value).
double characteristic_bc_u(double eta_boundary, Side side, const PhysicalParams& p);
double linearized_bc_u(double eta_boundary, Side side, const PhysicalParams& p);
double dimensional_bc_u(double h_boundary, Side side, const PhysicalParams& p, BcMode mode);

/// Semidiscrete operator for one (config, mesh) pair. Construction factors the masked
/// mass matrices once; `derivative` is then pure and may be called concurrently.
class SemiDiscreteOperator
{
public:
    SemiDiscreteOperator(SchemeConfig cfg, const fem::UniformMesh& mesh);

    const SchemeConfig& config() const { return cfg_; }
    const fem::UniformMesh& mesh() const { return mesh_; }

    /// Nodal time derivatives at time state.t. Dirichlet nodes receive derivative 0. Nodes
    /// closed by a characteristic relation receive the rate of that relation under
    /// BoundaryCoupling::Consistent and 0 under BoundaryCoupling::Frozen.
    SchemeState derivative(const SchemeState& state) const;

    /// Re-imposes the boundary closure on `state` in place: Dirichlet values for the
    /// supercritical and diagonal variants, characteristic (or linearized) u for the
    /// subcritical direct and dimensional variants.
    void close_boundary(SchemeState& state) const;

    /// True for variants whose u boundary nodes follow from the elevation algebraically.
    bool has_algebraic_closure() const;

private:
    void check_kind(const SchemeState& s) const;
    void add_forcing(std::vector<double>& first, std::vector<double>& second, double t) const;
    double boundary_rate(double depth_var, double rate, Side side) const;

    struct ForcingCache; // forcing load vectors at the most recent times

    SchemeConfig cfg_;
    fem::UniformMesh mesh_;
    fem::TridiagonalSolver full_;
    fem::TridiagonalSolver left_;
    fem::TridiagonalSolver right_;
    fem::TridiagonalSolver both_;
    std::shared_ptr<ForcingCache> forcing_cache_;
};

/// Convenience wrappers: build the operator for `state`'s mesh and evaluate once.
SchemeState rhs_supercritical(const SchemeState& state, const SchemeConfig& cfg);
SchemeState rhs_supercritical_homogenized(const SchemeState& state, const SchemeConfig& cfg);
SchemeState rhs_subcritical_direct(const SchemeState& state, const SchemeConfig& cfg);
SchemeState rhs_subcritical_diagonal(const SchemeState& state, const SchemeConfig& cfg);
SchemeState rhs_dimensional(const SchemeState& state, const SchemeConfig& cfg);

/// Assembled load vectors (before the mass solve) for the given variant, over the full
/// node set. Exposed for assembly-level verification.
struct LoadVectors
{
    std::vector<double> first;
    std::vector<double> second;
};
LoadVectors assemble_loads(const SchemeState& state, const SchemeConfig& cfg);

/// Converts any nondimensional state to physical (eta, u) nodal values: VW via the
/// inverse transform, homogenized states by adding the far-field offsets.
SchemeState to_physical(const SchemeState& state, const SchemeConfig& cfg);

/// max over nodes of u - sqrt(1 + eta) in physical variables. Throws DryState.
double criticality_monitor(const SchemeState& state, const SchemeConfig& cfg);

/// Integral of u^2 + eta^2/(1+eta0) over the mesh interval; u^2 + (g/H) h^2 for
/// DimensionalHU states. Pass perturbations to measure the energy of a disturbance.
double energy_integral(const SchemeState& state, const PhysicalParams& p);

} // namespace swcbc::schemes
