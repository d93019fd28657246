#include "swcbc/schemes.hpp"

#include "swcbc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>

namespace swcbc::schemes {

namespace {

// 3-point Gauss on [0, 1]: every Galerkin flux integrand here is a cubic on each element.
struct ElementRule
{
    std::array<double, 3> s;
    std::array<double, 3> w;
};

const ElementRule& flux_rule()
{
    static const ElementRule rule = [] {
        const auto ref = fem::gauss_rule(3);
        ElementRule r{};
        for (std::size_t q = 0; q < 3; ++q) {
            r.s[q] = 0.5 * (ref.points[q] + 1.0);
            r.w[q] = 0.5 * ref.weights[q];
        }
        return r;
    }();
    return rule;
}

const fem::QuadratureRule& source_rule()
{
    static const fem::QuadratureRule rule = fem::gauss_rule(5);
    return rule;
}

/// Accumulates (g1, phi_i) and (g2, phi_i) where g1, g2 are pointwise functions of the two
/// fields and their slopes: integrand(a, b, a_x, b_x) -> {g1, g2}.
template <class Integrand>
void assemble_flux(const fem::NodalField& a, const fem::NodalField& b, Integrand&& integrand,
                   std::vector<double>& load1, std::vector<double>& load2)
{
    const auto& rule = flux_rule();
    const double h = a.mesh.h();
    const double inv_h = 1.0 / h;
    const std::size_t elements = static_cast<std::size_t>(a.mesh.elements());
    for (std::size_t j = 0; j < elements; ++j) {
        const double aL = a[j], aR = a[j + 1];
        const double bL = b[j], bR = b[j + 1];
        const double ax = (aR - aL) * inv_h;
        const double bx = (bR - bL) * inv_h;
        double l1 = 0.0, r1 = 0.0, l2 = 0.0, r2 = 0.0;
        for (std::size_t q = 0; q < 3; ++q) {
            const double s = rule.s[q];
            const double av = aL + s * (aR - aL);
            const double bv = bL + s * (bR - bL);
            const auto [g1, g2] = integrand(av, bv, ax, bx);
            const double w1 = rule.w[q] * g1;
            const double w2 = rule.w[q] * g2;
            l1 += w1 * (1.0 - s);
            r1 += w1 * s;
            l2 += w2 * (1.0 - s);
            r2 += w2 * s;
        }
        load1[j] += h * l1;
        load1[j + 1] += h * r1;
        load2[j] += h * l2;
        load2[j + 1] += h * r2;
    }
}

void add_source(const fem::UniformMesh& mesh, const std::function<double(int, double)>& f,
                std::vector<double>& load)
{
    const auto& rule = source_rule();
    const double h = mesh.h();
    for (int j = 0; j < mesh.elements(); ++j) {
        const double xl = mesh.node(static_cast<std::size_t>(j));
        double left = 0.0;
        double right = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = 0.5 * (rule.points[q] + 1.0);
            const double wf = 0.5 * rule.weights[q] * f(j, xl + s * h);
            left += wf * (1.0 - s);
            right += wf * s;
        }
        load[static_cast<std::size_t>(j)] += h * left;
        load[static_cast<std::size_t>(j) + 1] += h * right;
    }
}

void require_wet(double depth, const char* where)
{
    if (!(depth > 0.0)) {
        throw DryState(std::string("non-positive water column at ") + where + " (value " +
                       std::to_string(depth) + ")");
    }
}

/// Solves the masked system on the slice [first, first+solver.size()) of `load` and zeroes
/// the entries outside it.
void masked_solve(const fem::TridiagonalSolver& solver, std::size_t first,
                  std::vector<double>& load)
{
    const std::size_t n = solver.size();
    solver.solve(std::span<double>(load).subspan(first, n));
    std::fill(load.begin(), load.begin() + static_cast<std::ptrdiff_t>(first), 0.0);
    std::fill(load.begin() + static_cast<std::ptrdiff_t>(first + n), load.end(), 0.0);
}

} // namespace

PhysicalParams PhysicalParams::nondimensional(double eta0, double u0)
{
    if (!(1.0 + eta0 > 0.0)) {
        throw DryState("far-field depth 1 + eta0 must be positive");
    }
    PhysicalParams p;
    p.eta0 = eta0;
    p.u0 = u0;
    p.delta0 = std::sqrt(1.0 + eta0);
    return p;
}

PhysicalParams PhysicalParams::dimensional(double g, double H, double L, double h0, double u0)
{
    if (!(g > 0.0) || !(H > 0.0) || !(L > 0.0) || !(h0 > 0.0)) {
        throw ConfigError("dimensional parameters g, H, L, h0 must all be positive");
    }
    PhysicalParams p;
    p.g = g;
    p.H = H;
    p.L = L;
    p.h0 = h0;
    p.u0 = u0;
    return p;
}

double PhysicalParams::a_plus() const { return u0 + 2.0 * std::sqrt(g * h0); }
double PhysicalParams::a_minus() const { return u0 - 2.0 * std::sqrt(g * h0); }
double PhysicalParams::b_plus() const { return u0 + std::sqrt(g / H) * h0; }
double PhysicalParams::b_minus() const { return u0 - std::sqrt(g / H) * h0; }

std::string_view to_string(Variant v)
{
    switch (v) {
    case Variant::SupercriticalDirect: return "supercritical";
    case Variant::SupercriticalHomogenized: return "supercritical-homogenized";
    case Variant::SubcriticalDirect: return "subcritical-direct";
    case Variant::SubcriticalDiagonal: return "subcritical-diagonal";
    case Variant::Dimensional: return "dimensional";
    }
    return "?";
}

std::string_view to_string(BcMode m)
{
    return m == BcMode::NonlinearCharacteristic ? "nonlinear" : "linearized";
}

Variant parse_variant(std::string_view s)
{
    for (auto v : {Variant::SupercriticalDirect, Variant::SupercriticalHomogenized,
                   Variant::SubcriticalDirect, Variant::SubcriticalDiagonal,
                   Variant::Dimensional}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw ConfigError("unknown scheme variant '" + std::string(s) + "'");
}

BcMode parse_bc_mode(std::string_view s)
{
    if (s == "nonlinear") {
        return BcMode::NonlinearCharacteristic;
    }
    if (s == "linearized") {
        return BcMode::LinearizedCharacteristic;
    }
    throw ConfigError("unknown boundary mode '" + std::string(s) + "'");
}

std::string_view to_string(BoundaryCoupling c)
{
    return c == BoundaryCoupling::Consistent ? "consistent" : "frozen";
}

BoundaryCoupling parse_coupling(std::string_view s)
{
    if (s == "consistent") {
        return BoundaryCoupling::Consistent;
    }
    if (s == "frozen") {
        return BoundaryCoupling::Frozen;
    }
    throw ConfigError("unknown boundary coupling '" + std::string(s) + "'");
}

StateKind state_kind(Variant v)
{
    switch (v) {
    case Variant::SubcriticalDiagonal: return StateKind::VW;
    case Variant::Dimensional: return StateKind::DimensionalHU;
    default: return StateKind::EtaU;
    }
}

SchemeState::SchemeState(StateKind k, fem::NodalField a, fem::NodalField b, double time)
    : kind(k), first(std::move(a)), second(std::move(b)), t(time)
{
    if (!(first.mesh == second.mesh)) {
        throw InvalidMesh("state fields live on different meshes");
    }
}

void add_scaled(SchemeState& y, double a, const SchemeState& x)
{
    for (std::size_t i = 0; i < y.first.size(); ++i) {
        y.first[i] += a * x.first[i];
        y.second[i] += a * x.second[i];
    }
}

Invariants riemann_forward(double eta, double u, const PhysicalParams& p)
{
    require_wet(1.0 + eta, "riemann_forward");
    const double c = 2.0 * (std::sqrt(1.0 + eta) - p.delta0);
    const double du = u - p.u0;
    return {0.5 * (du + c), 0.5 * (du - c)};
}

Physical riemann_inverse(double v, double w, const PhysicalParams& p)
{
    const double root = 0.5 * (v - w) + p.delta0;
    require_wet(root, "riemann_inverse");
    return {root * root - 1.0, v + w + p.u0};
}

WaveSpeeds wave_speeds(double v, double w, const PhysicalParams& p)
{
    return {p.u0 + p.delta0 + 0.5 * (3.0 * v + w), p.u0 - p.delta0 + 0.5 * (v + 3.0 * w)};
}

double characteristic_bc_u(double eta_boundary, Side side, const PhysicalParams& p)
{
    require_wet(1.0 + eta_boundary, "characteristic boundary");
    const double c = 2.0 * std::sqrt(1.0 + eta_boundary);
    return side == Side::Left ? -c + p.u0 + 2.0 * p.delta0 : c + p.u0 - 2.0 * p.delta0;
}

double linearized_bc_u(double eta_boundary, Side side, const PhysicalParams& p)
{
    const double d = (eta_boundary - p.eta0) / p.delta0;
    return side == Side::Left ? p.u0 - d : p.u0 + d;
}

double dimensional_bc_u(double h_boundary, Side side, const PhysicalParams& p, BcMode mode)
{
    if (mode == BcMode::NonlinearCharacteristic) {
        require_wet(h_boundary, "dimensional characteristic boundary");
        const double c = 2.0 * std::sqrt(p.g * h_boundary);
        return side == Side::Left ? p.a_plus() - c : p.a_minus() + c;
    }
    const double c = std::sqrt(p.g / p.H) * h_boundary;
    return side == Side::Left ? p.b_plus() - c : p.b_minus() + c;
}

SemiDiscreteOperator::SemiDiscreteOperator(SchemeConfig cfg, const fem::UniformMesh& mesh)
    : cfg_(std::move(cfg)),
      mesh_(mesh),
      full_(fem::assemble_mass_matrix(mesh, fem::BoundaryMask::none())),
      left_(fem::assemble_mass_matrix(mesh, fem::BoundaryMask::left())),
      right_(fem::assemble_mass_matrix(mesh, fem::BoundaryMask::right())),
      both_(fem::assemble_mass_matrix(mesh, fem::BoundaryMask::both())),
      forcing_cache_(std::make_shared<ForcingCache>())
{
    if (cfg_.momentum_impulse && cfg_.variant != Variant::Dimensional) {
        throw ConfigError("momentum impulse forcing applies to the dimensional variant only");
    }
}

bool SemiDiscreteOperator::has_algebraic_closure() const
{
    return cfg_.variant == Variant::SubcriticalDirect || cfg_.variant == Variant::Dimensional;
}

void SemiDiscreteOperator::check_kind(const SchemeState& s) const
{
    if (s.kind != state_kind(cfg_.variant)) {
        throw ConfigError("state kind does not match scheme variant " +
                          std::string(to_string(cfg_.variant)));
    }
    if (!(s.mesh() == mesh_)) {
        throw InvalidMesh("state mesh differs from the operator mesh");
    }
}

// Runge-Kutta stages revisit the same times (two share t + k/2, and the last stage of a
// step shares t + k with the first of the next), so recent loads are kept.
struct SemiDiscreteOperator::ForcingCache
{
    struct Entry
    {
        double t;
        std::vector<double> first;
        std::vector<double> second;
    };
    std::mutex mutex;
    std::array<std::optional<Entry>, 2> entries;
    std::size_t next = 0;
};

void SemiDiscreteOperator::add_forcing(std::vector<double>& first, std::vector<double>& second,
                                       double t) const
{
    if (!cfg_.forcing) {
        return;
    }
    auto add = [&](const ForcingCache::Entry& e) {
        for (std::size_t i = 0; i < first.size(); ++i) {
            first[i] += e.first[i];
            second[i] += e.second[i];
        }
    };
    {
        std::lock_guard lock(forcing_cache_->mutex);
        for (const auto& e : forcing_cache_->entries) {
            if (e && e->t == t) {
                add(*e);
                return;
            }
        }
    }

    const auto& f = *cfg_.forcing;
    ForcingCache::Entry e{t, std::vector<double>(first.size(), 0.0),
                          std::vector<double>(second.size(), 0.0)};
    if (f.first) {
        add_source(mesh_, [&](int, double x) { return f.first(x, t); }, e.first);
    }
    if (f.second) {
        add_source(mesh_, [&](int, double x) { return f.second(x, t); }, e.second);
    }
    add(e);
    std::lock_guard lock(forcing_cache_->mutex);
    forcing_cache_->entries[forcing_cache_->next] = std::move(e);
    forcing_cache_->next = (forcing_cache_->next + 1) % forcing_cache_->entries.size();
}

LoadVectors assemble_loads(const SchemeState& state, const SchemeConfig& cfg)
{
    const auto& p = cfg.params;
    const auto n = state.first.size();
    LoadVectors L{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

    switch (cfg.variant) {
    case Variant::SupercriticalDirect:
    case Variant::SubcriticalDirect:
        assemble_flux(
            state.first, state.second,
            [](double eta, double u, double eta_x, double u_x) {
                return std::pair{-(u_x + eta_x * u + eta * u_x), -(eta_x + u * u_x)};
            },
            L.first, L.second);
        break;
    case Variant::SupercriticalHomogenized: {
        const double u0 = p.u0;
        const double depth0 = 1.0 + p.eta0;
        assemble_flux(
            state.first, state.second,
            [u0, depth0](double eta, double u, double eta_x, double u_x) {
                return std::pair{-(u0 * eta_x + depth0 * u_x + eta_x * u + eta * u_x),
                                 -(eta_x + u0 * u_x + u * u_x)};
            },
            L.first, L.second);
        break;
    }
    case Variant::SubcriticalDiagonal: {
        const double c1 = p.u0 + p.delta0;
        const double c2 = p.u0 - p.delta0;
        assemble_flux(
            state.first, state.second,
            [c1, c2](double v, double w, double v_x, double w_x) {
                return std::pair{-(c1 * v_x + 1.5 * v * v_x + 0.5 * w * v_x),
                                 -(c2 * w_x + 1.5 * w * w_x + 0.5 * v * w_x)};
            },
            L.first, L.second);
        break;
    }
    case Variant::Dimensional: {
        const double g = p.g;
        assemble_flux(
            state.first, state.second,
            [g](double h, double u, double h_x, double u_x) {
                return std::pair{-(h_x * u + h * u_x), -(g * h_x + u * u_x)};
            },
            L.first, L.second);
        if (cfg.momentum_impulse) {
            const auto& F = cfg.momentum_impulse;
            const auto& hf = state.first;
            const double t = state.t;
            const double inv_h = 1.0 / hf.mesh.h();
            add_source(
                hf.mesh,
                [&](int j, double x) {
                    const auto ju = static_cast<std::size_t>(j);
                    const double s = (x - hf.mesh.node(ju)) * inv_h;
                    const double depth = hf[ju] + s * (hf[ju + 1] - hf[ju]);
                    return -F(x, t) / depth;
                },
                L.second);
        }
        break;
    }
    }
    return L;
}

SchemeState SemiDiscreteOperator::derivative(const SchemeState& state) const
{
    check_kind(state);
    if (cfg_.variant == Variant::Dimensional) {
        const double min_h = *std::min_element(state.first.coeffs.begin(), state.first.coeffs.end());
        require_wet(min_h, "a dimensional node");
    }
    if (cfg_.variant == Variant::SubcriticalDirect) {
        require_wet(1.0 + state.first.front(), "left boundary");
        require_wet(1.0 + state.first.back(), "right boundary");
    }

    auto L = assemble_loads(state, cfg_);
    add_forcing(L.first, L.second, state.t);

    switch (cfg_.variant) {
    case Variant::SupercriticalDirect:
    case Variant::SupercriticalHomogenized:
        masked_solve(left_, 1, L.first);
        masked_solve(left_, 1, L.second);
        break;
    case Variant::SubcriticalDirect:
    case Variant::Dimensional:
        masked_solve(full_, 0, L.first);
        if (cfg_.coupling == BoundaryCoupling::Consistent) {
            // (u_t, phi_1) and (u_t, phi_{N-1}) see h/6 of the boundary rates; move that to
            // the right-hand side.
            const double dl = boundary_rate(state.first.front(), L.first.front(), Side::Left);
            const double dr = boundary_rate(state.first.back(), L.first.back(), Side::Right);
            const double m = mesh_.h() / 6.0;
            L.second[1] -= m * dl;
            L.second[L.second.size() - 2] -= m * dr;
            masked_solve(both_, 1, L.second);
            L.second.front() = dl;
            L.second.back() = dr;
        } else {
            masked_solve(both_, 1, L.second);
        }
        break;
    case Variant::SubcriticalDiagonal:
        masked_solve(left_, 1, L.first);
        masked_solve(right_, 0, L.second);
        break;
    }
    return SchemeState(state.kind, fem::NodalField(mesh_, std::move(L.first)),
                       fem::NodalField(mesh_, std::move(L.second)), state.t);
}

double SemiDiscreteOperator::boundary_rate(double depth_var, double rate, Side side) const
{
    const auto& p = cfg_.params;
    const double sign = side == Side::Left ? -1.0 : 1.0;
    if (cfg_.variant == Variant::Dimensional) {
        if (cfg_.bc_mode == BcMode::NonlinearCharacteristic) {
            return sign * p.g * rate / std::sqrt(p.g * depth_var);
        }
        return sign * std::sqrt(p.g / p.H) * rate;
    }
    if (cfg_.bc_mode == BcMode::NonlinearCharacteristic) {
        return sign * rate / std::sqrt(1.0 + depth_var);
    }
    return sign * rate / p.delta0;
}

void SemiDiscreteOperator::close_boundary(SchemeState& s) const
{
    const auto& p = cfg_.params;
    switch (cfg_.variant) {
    case Variant::SupercriticalDirect:
        s.first.coeffs.front() = p.eta0;
        s.second.coeffs.front() = p.u0;
        break;
    case Variant::SupercriticalHomogenized:
        s.first.coeffs.front() = 0.0;
        s.second.coeffs.front() = 0.0;
        break;
    case Variant::SubcriticalDiagonal:
        s.first.coeffs.front() = 0.0;
        s.second.coeffs.back() = 0.0;
        break;
    case Variant::SubcriticalDirect:
        if (cfg_.bc_mode == BcMode::NonlinearCharacteristic) {
            s.second.coeffs.front() = characteristic_bc_u(s.first.front(), Side::Left, p);
            s.second.coeffs.back() = characteristic_bc_u(s.first.back(), Side::Right, p);
        } else {
            s.second.coeffs.front() = linearized_bc_u(s.first.front(), Side::Left, p);
            s.second.coeffs.back() = linearized_bc_u(s.first.back(), Side::Right, p);
        }
        break;
    case Variant::Dimensional:
        s.second.coeffs.front() = dimensional_bc_u(s.first.front(), Side::Left, p, cfg_.bc_mode);
        s.second.coeffs.back() = dimensional_bc_u(s.first.back(), Side::Right, p, cfg_.bc_mode);
        break;
    }
}

namespace {

SchemeState evaluate_once(const SchemeState& state, SchemeConfig cfg, Variant expected)
{
    if (cfg.variant != expected) {
        throw ConfigError("configuration variant " + std::string(to_string(cfg.variant)) +
                          " passed to the " + std::string(to_string(expected)) + " evaluator");
    }
    return SemiDiscreteOperator(std::move(cfg), state.mesh()).derivative(state);
}

} // namespace

SchemeState rhs_supercritical(const SchemeState& state, const SchemeConfig& cfg)
{
    return evaluate_once(state, cfg, Variant::SupercriticalDirect);
}

SchemeState rhs_supercritical_homogenized(const SchemeState& state, const SchemeConfig& cfg)
{
    return evaluate_once(state, cfg, Variant::SupercriticalHomogenized);
}

SchemeState rhs_subcritical_direct(const SchemeState& state, const SchemeConfig& cfg)
{
    return evaluate_once(state, cfg, Variant::SubcriticalDirect);
}

SchemeState rhs_subcritical_diagonal(const SchemeState& state, const SchemeConfig& cfg)
{
    return evaluate_once(state, cfg, Variant::SubcriticalDiagonal);
}

SchemeState rhs_dimensional(const SchemeState& state, const SchemeConfig& cfg)
{
    return evaluate_once(state, cfg, Variant::Dimensional);
}

SchemeState to_physical(const SchemeState& state, const SchemeConfig& cfg)
{
    const auto& p = cfg.params;
    SchemeState out = state;
    switch (cfg.variant) {
    case Variant::SupercriticalHomogenized:
        for (std::size_t i = 0; i < out.first.size(); ++i) {
            out.first[i] += p.eta0;
            out.second[i] += p.u0;
        }
        break;
    case Variant::SubcriticalDiagonal:
        out.kind = StateKind::EtaU;
        for (std::size_t i = 0; i < out.first.size(); ++i) {
            const auto phys = riemann_inverse(state.first[i], state.second[i], p);
            out.first[i] = phys.eta;
            out.second[i] = phys.u;
        }
        break;
    default:
        break;
    }
    return out;
}

double criticality_monitor(const SchemeState& state, const SchemeConfig& cfg)
{
    const auto phys = to_physical(state, cfg);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phys.first.size(); ++i) {
        if (phys.kind == StateKind::DimensionalHU) {
            require_wet(phys.first[i], "criticality monitor");
            m = std::max(m, phys.second[i] - std::sqrt(cfg.params.g * phys.first[i]));
        } else {
            require_wet(1.0 + phys.first[i], "criticality monitor");
            m = std::max(m, phys.second[i] - std::sqrt(1.0 + phys.first[i]));
        }
    }
    return m;
}

double energy_integral(const SchemeState& state, const PhysicalParams& p)
{
    const double nu = fem::l2_norm(state.second);
    const double ne = fem::l2_norm(state.first);
    const double weight = state.kind == StateKind::DimensionalHU ? p.g / p.H : 1.0 / (1.0 + p.eta0);
    return nu * nu + weight * ne * ne;
}

} // namespace swcbc::schemes
