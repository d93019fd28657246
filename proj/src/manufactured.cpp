#include "swcbc/manufactured.hpp"

#include "swcbc/errors.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace swcbc::studies {

namespace {

using std::numbers::pi;

/// A smooth field with its first partial derivatives in closed form.
struct Smooth
{
    SpaceTimeFunction f;
    SpaceTimeFunction fx;
    SpaceTimeFunction ft;
};

/// Source terms of  eta_t + u_x + (eta u)_x = S1,  u_t + eta_x + u u_x = S2.
schemes::Forcing shallow_water_sources(const Smooth& eta, const Smooth& u)
{
    return {
        [eta, u](double x, double t) {
            const double e = eta.f(x, t);
            const double v = u.f(x, t);
            return eta.ft(x, t) + u.fx(x, t) * (1.0 + e) + eta.fx(x, t) * v;
        },
        [eta, u](double x, double t) {
            return u.ft(x, t) + eta.fx(x, t) + u.f(x, t) * u.fx(x, t);
        },
    };
}

/// eta = x e^{-xt} + eta0, u = (1 - x - cos(pi x)) e^{2t} + u0.
ManufacturedCase supercritical_case()
{
    const auto p = schemes::PhysicalParams::nondimensional(1.0, 3.0);
    const double eta0 = p.eta0;
    const double u0 = p.u0;
    const Smooth eta{
        [eta0](double x, double t) { return x * std::exp(-x * t) + eta0; },
        [](double x, double t) { return std::exp(-x * t) * (1.0 - x * t); },
        [](double x, double t) { return -x * x * std::exp(-x * t); },
    };
    const Smooth u{
        [u0](double x, double t) { return (1.0 - x - std::cos(pi * x)) * std::exp(2.0 * t) + u0; },
        [](double x, double t) { return (-1.0 + pi * std::sin(pi * x)) * std::exp(2.0 * t); },
        [](double x, double t) { return 2.0 * (1.0 - x - std::cos(pi * x)) * std::exp(2.0 * t); },
    };

    ManufacturedCase c;
    c.name = "supercritical";
    c.cfg.variant = schemes::Variant::SupercriticalDirect;
    c.cfg.params = p;
    c.cfg.forcing = shallow_water_sources(eta, u);
    c.exact_eta = eta.f;
    c.exact_u = u.f;
    c.exact_first = eta.f;
    c.exact_second = u.f;
    return c;
}

/// eta = (x + 1) e^{-xt}.
Smooth subcritical_eta()
{
    return {
        [](double x, double t) { return (x + 1.0) * std::exp(-x * t); },
        [](double x, double t) { return std::exp(-x * t) * (1.0 - t * (x + 1.0)); },
        [](double x, double t) { return -x * (x + 1.0) * std::exp(-x * t); },
    };
}

/// u = (2x + cos(pi x) - 1) e^t + x R(t) + (1 - x) Lf(t), where R and Lf are the boundary
/// values at x = 1 and x = 0 (the interior profile vanishes at both ends).
Smooth subcritical_u(std::function<double(double)> R, std::function<double(double)> dR,
                     std::function<double(double)> Lf, std::function<double(double)> dLf)
{
    return {
        [R, Lf](double x, double t) {
            return (2.0 * x + std::cos(pi * x) - 1.0) * std::exp(t) + x * R(t) + (1.0 - x) * Lf(t);
        },
        [R, Lf](double x, double t) {
            return (2.0 - pi * std::sin(pi * x)) * std::exp(t) + R(t) - Lf(t);
        },
        [dR, dLf](double x, double t) {
            return (2.0 * x + std::cos(pi * x) - 1.0) * std::exp(t) + x * dR(t) +
                   (1.0 - x) * dLf(t);
        },
    };
}

struct SubcriticalPieces
{
    schemes::PhysicalParams params;
    Smooth eta;
    Smooth u;
    std::vector<std::pair<std::string, std::function<double(double)>>> boundary;
};

/// Boundary values chosen so that the exact solution satisfies the nonlinear
/// characteristic relations at both ends.
SubcriticalPieces nonlinear_pieces()
{
    const auto p = schemes::PhysicalParams::nondimensional(1.0, 1.0);
    const Smooth eta = subcritical_eta();
    const double u0 = p.u0;
    const double d0 = p.delta0;
    auto A = [eta, u0, d0](double t) { return 2.0 * std::sqrt(1.0 + eta.f(1.0, t)) + u0 - 2.0 * d0; };
    auto dA = [eta](double t) { return eta.ft(1.0, t) / std::sqrt(1.0 + eta.f(1.0, t)); };
    auto B = [eta, u0, d0](double t) { return -2.0 * std::sqrt(1.0 + eta.f(0.0, t)) + u0 + 2.0 * d0; };
    auto dB = [eta](double t) { return -eta.ft(0.0, t) / std::sqrt(1.0 + eta.f(0.0, t)); };
    return {p, eta, subcritical_u(A, dA, B, dB), {{"A", A}, {"B", B}}};
}

ManufacturedCase subcritical_direct_case()
{
    auto pieces = nonlinear_pieces();
    ManufacturedCase c;
    c.name = "subcritical_direct";
    c.cfg.variant = schemes::Variant::SubcriticalDirect;
    c.cfg.bc_mode = schemes::BcMode::NonlinearCharacteristic;
    c.cfg.params = pieces.params;
    c.cfg.forcing = shallow_water_sources(pieces.eta, pieces.u);
    c.exact_eta = pieces.eta.f;
    c.exact_u = pieces.u.f;
    c.exact_first = pieces.eta.f;
    c.exact_second = pieces.u.f;
    c.boundary_data = pieces.boundary;
    return c;
}

/// Same (eta, u), evolved in the invariants (v, w). The sources are those of
///   v_t + lambda1 v_x = S_v,   w_t + lambda2 w_x = S_w
/// with lambda1,2 = u +- sqrt(1 + eta) of the exact solution. Scaling the unknowns to
/// (2v, 2w) scales these sources by 2 and leaves the discrete (eta, u) unchanged.
ManufacturedCase subcritical_diagonal_case()
{
    auto pieces = nonlinear_pieces();
    const auto p = pieces.params;
    const Smooth eta = pieces.eta;
    const Smooth u = pieces.u;

    auto v = [eta, u, p](double x, double t) {
        return schemes::riemann_forward(eta.f(x, t), u.f(x, t), p).v;
    };
    auto w = [eta, u, p](double x, double t) {
        return schemes::riemann_forward(eta.f(x, t), u.f(x, t), p).w;
    };
    // v_s = (u_s + eta_s / sqrt(1 + eta)) / 2 and w_s = (u_s - eta_s / sqrt(1 + eta)) / 2.
    auto source = [eta, u](double sign) {
        return [eta, u, sign](double x, double t) {
            const double root = std::sqrt(1.0 + eta.f(x, t));
            const double dt = 0.5 * (u.ft(x, t) + sign * eta.ft(x, t) / root);
            const double dx = 0.5 * (u.fx(x, t) + sign * eta.fx(x, t) / root);
            const double speed = u.f(x, t) + sign * root;
            return dt + speed * dx;
        };
    };

    ManufacturedCase c;
    c.name = "subcritical_diagonal";
    c.cfg.variant = schemes::Variant::SubcriticalDiagonal;
    c.cfg.params = p;
    c.cfg.forcing = schemes::Forcing{source(1.0), source(-1.0)};
    c.exact_eta = eta.f;
    c.exact_u = u.f;
    c.exact_first = v;
    c.exact_second = w;
    c.boundary_data = pieces.boundary;
    return c;
}

/// Boundary values a(t), b(t) chosen so that the exact solution satisfies the linearized
/// characteristic relations.
ManufacturedCase subcritical_linearized_case()
{
    const auto p = schemes::PhysicalParams::nondimensional(1.0, 1.0);
    const Smooth eta = subcritical_eta();
    const double u0 = p.u0;
    const double eta0 = p.eta0;
    const double d0 = p.delta0;
    auto a = [u0, eta0, d0](double t) { return u0 + (2.0 * std::exp(-t) - eta0) / d0; };
    auto da = [d0](double t) { return -2.0 * std::exp(-t) / d0; };
    auto b = [u0, eta0, d0](double) { return u0 + (eta0 - 1.0) / d0; };
    auto db = [](double) { return 0.0; };
    const Smooth u = subcritical_u(a, da, b, db);

    ManufacturedCase c;
    c.name = "subcritical_linearized";
    c.cfg.variant = schemes::Variant::SubcriticalDirect;
    c.cfg.bc_mode = schemes::BcMode::LinearizedCharacteristic;
    c.cfg.params = p;
    c.cfg.forcing = shallow_water_sources(eta, u);
    c.exact_eta = eta.f;
    c.exact_u = u.f;
    c.exact_first = eta.f;
    c.exact_second = u.f;
    c.boundary_data = {{"a", a}, {"b", b}};
    return c;
}

} // namespace

const std::function<double(double)>& ManufacturedCase::boundary(std::string_view key) const
{
    for (const auto& [k, f] : boundary_data) {
        if (k == key) {
            return f;
        }
    }
    throw UnknownCase("case '" + name + "' has no boundary function '" + std::string(key) + "'");
}

std::vector<std::string> mms_case_names()
{
    return {"supercritical", "subcritical_direct", "subcritical_diagonal",
            "subcritical_linearized"};
}

ManufacturedCase mms_catalog(std::string_view name)
{
    if (name == "supercritical") {
        return supercritical_case();
    }
    if (name == "subcritical_direct") {
        return subcritical_direct_case();
    }
    if (name == "subcritical_diagonal") {
        return subcritical_diagonal_case();
    }
    if (name == "subcritical_linearized") {
        return subcritical_linearized_case();
    }
    throw UnknownCase("no manufactured case named '" + std::string(name) + "'");
}

ManufacturedCase homogenized(const ManufacturedCase& supercritical)
{
    if (supercritical.cfg.variant != schemes::Variant::SupercriticalDirect) {
        throw ConfigError("only the supercritical case has a homogenized form");
    }
    ManufacturedCase c = supercritical;
    c.name = supercritical.name + "_homogenized";
    c.cfg.variant = schemes::Variant::SupercriticalHomogenized;
    const double eta0 = c.cfg.params.eta0;
    const double u0 = c.cfg.params.u0;
    auto eta = supercritical.exact_eta;
    auto u = supercritical.exact_u;
    c.exact_first = [eta, eta0](double x, double t) { return eta(x, t) - eta0; };
    c.exact_second = [u, u0](double x, double t) { return u(x, t) - u0; };
    return c;
}

} // namespace swcbc::studies
