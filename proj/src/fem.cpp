#include "swcbc/fem.hpp"

#include "swcbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swcbc::fem {

UniformMesh::UniformMesh(double a, double b, int N) : a_(a), b_(b), N_(N), h_(0.0)
{
    if (N < 2) {
        throw InvalidMesh("element count must be at least 2, got " + std::to_string(N));
    }
    if (!(b > a)) {
        throw InvalidMesh("right endpoint must exceed left endpoint");
    }
    h_ = (b - a) / N;
}

std::vector<double> UniformMesh::nodes() const
{
    std::vector<double> x(node_count());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = node(i);
    }
    return x;
}

int UniformMesh::locate(double x) const
{
    if (!(x >= a_ && x <= b_)) {
        throw OutOfDomain("x = " + std::to_string(x) + " outside [" + std::to_string(a_) + ", " +
                          std::to_string(b_) + "]");
    }
    const auto j = static_cast<int>(std::ceil((x - a_) / h_)) - 1;
    return std::clamp(j, 0, N_ - 1);
}

UniformMesh build_mesh(double a, double b, int N) { return UniformMesh(a, b, N); }

NodalField::NodalField(const UniformMesh& m, std::vector<double> values)
    : mesh(m), coeffs(std::move(values))
{
    if (coeffs.size() != mesh.node_count()) {
        throw InvalidMesh("nodal vector length " + std::to_string(coeffs.size()) +
                          " does not match mesh with " + std::to_string(mesh.node_count()) +
                          " nodes");
    }
}

QuadratureRule gauss_rule(int n)
{
    QuadratureRule rule;
    switch (n) {
    case 2: {
        const double p = 1.0 / std::sqrt(3.0);
        rule.points = {-p, p};
        rule.weights = {1.0, 1.0};
        break;
    }
    case 3: {
        const double p = std::sqrt(0.6);
        rule.points = {-p, 0.0, p};
        rule.weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        break;
    }
    case 5: {
        const double r = 2.0 * std::sqrt(10.0 / 7.0);
        const double inner = std::sqrt(5.0 - r) / 3.0;
        const double outer = std::sqrt(5.0 + r) / 3.0;
        const double w_inner = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
        const double w_outer = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
        rule.points = {-outer, -inner, 0.0, inner, outer};
        rule.weights = {w_outer, w_inner, 128.0 / 225.0, w_inner, w_outer};
        break;
    }
    default:
        throw UnsupportedRule("Gauss rule with " + std::to_string(n) +
                              " points is not available (use 2, 3 or 5)");
    }
    rule.order = 2 * n - 1;
    return rule;
}

std::vector<double> TridiagonalMatrix::multiply(std::span<const double> x) const
{
    const std::size_t n = diag.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) {
            s += sub[i - 1] * x[i - 1];
        }
        if (i + 1 < n) {
            s += super[i] * x[i + 1];
        }
        y[i] = s;
    }
    return y;
}

TridiagonalMatrix assemble_mass_matrix(const UniformMesh& mesh, BoundaryMask mask)
{
    // Full P1 Gram matrix: h/3 at the ends, 2h/3 inside, h/6 off the diagonal.
    const double h = mesh.h();
    const std::size_t full = mesh.node_count();
    const std::size_t first = mask.fix_left ? 1 : 0;
    const std::size_t last = mask.fix_right ? full - 2 : full - 1;
    const std::size_t n = last - first + 1;

    TridiagonalMatrix M;
    M.diag.resize(n);
    M.sub.assign(n - 1, h / 6.0);
    M.super.assign(n - 1, h / 6.0);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = first + r;
        M.diag[r] = (i == 0 || i == full - 1) ? h / 3.0 : 2.0 * h / 3.0;
    }
    return M;
}

TridiagonalSolver::TridiagonalSolver(const TridiagonalMatrix& T)
{
    const std::size_t n = T.size();
    lower_.assign(n, 0.0);
    inv_pivot_.resize(n);
    super_ = T.super;
    double pivot = T.diag.at(0);
    for (std::size_t i = 0;; ++i) {
        if (std::abs(pivot) < 1e-300) {
            throw SingularMatrix("zero pivot in row " + std::to_string(i));
        }
        inv_pivot_[i] = 1.0 / pivot;
        if (i + 1 == n) {
            break;
        }
        lower_[i + 1] = T.sub[i] * inv_pivot_[i];
        pivot = T.diag[i + 1] - lower_[i + 1] * T.super[i];
    }
}

void TridiagonalSolver::solve(std::span<double> x) const
{
    const std::size_t n = inv_pivot_.size();
    for (std::size_t i = 1; i < n; ++i) {
        x[i] -= lower_[i] * x[i - 1];
    }
    x[n - 1] *= inv_pivot_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (x[i] - super_[i] * x[i + 1]) * inv_pivot_[i];
    }
}

std::vector<double> solve_tridiagonal(const TridiagonalMatrix& T, std::span<const double> rhs)
{
    std::vector<double> x(rhs.begin(), rhs.end());
    TridiagonalSolver(T).solve(x);
    return x;
}

std::vector<double> load_vector(const ScalarFunction& f, const UniformMesh& mesh,
                                const QuadratureRule& rule)
{
    std::vector<double> load(mesh.node_count(), 0.0);
    const double h = mesh.h();
    for (int j = 0; j < mesh.elements(); ++j) {
        const double xl = mesh.node(static_cast<std::size_t>(j));
        double left = 0.0;
        double right = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = 0.5 * (rule.points[q] + 1.0);
            const double wf = 0.5 * h * rule.weights[q] * f(xl + s * h);
            left += wf * (1.0 - s);
            right += wf * s;
        }
        load[static_cast<std::size_t>(j)] += left;
        load[static_cast<std::size_t>(j) + 1] += right;
    }
    return load;
}

NodalField l2_project(const ScalarFunction& f, const UniformMesh& mesh, BoundaryMask mask,
                      std::optional<std::pair<double, double>> boundary_values)
{
    if ((mask.fix_left || mask.fix_right) && !boundary_values) {
        throw MissingBoundaryValue("projection with a fixed boundary node needs boundary values");
    }
    // Galerkin conditions on the unmasked nodes only; fixed nodal values are lifted to the
    // right-hand side.
    auto load = load_vector(f, mesh, gauss_rule(5));
    std::vector<double> coeffs(load.size(), 0.0);
    const double off = mesh.h() / 6.0;
    std::size_t first = 0;
    std::size_t last = load.size() - 1;
    if (mask.fix_left) {
        coeffs.front() = boundary_values->first;
        load[1] -= off * coeffs.front();
        first = 1;
    }
    if (mask.fix_right) {
        coeffs.back() = boundary_values->second;
        load[load.size() - 2] -= off * coeffs.back();
        last = load.size() - 2;
    }
    std::copy(load.begin() + static_cast<std::ptrdiff_t>(first),
              load.begin() + static_cast<std::ptrdiff_t>(last + 1),
              coeffs.begin() + static_cast<std::ptrdiff_t>(first));
    TridiagonalSolver(assemble_mass_matrix(mesh, mask))
        .solve(std::span<double>(coeffs).subspan(first, last - first + 1));
    NodalField g(mesh, std::move(coeffs));
    return g;
}

NodalField interpolate(const ScalarFunction& f, const UniformMesh& mesh)
{
    NodalField g(mesh);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = f(mesh.node(i));
    }
    return g;
}

double eval_field(const NodalField& g, double x)
{
    const int j = g.mesh.locate(x);
    const auto ju = static_cast<std::size_t>(j);
    const double s = (x - g.mesh.node(ju)) / g.mesh.h();
    return g[ju] * (1.0 - s) + g[ju + 1] * s;
}

double eval_deriv(const NodalField& g, double x)
{
    const auto j = static_cast<std::size_t>(g.mesh.locate(x));
    return (g[j + 1] - g[j]) / g.mesh.h();
}

double l2_error(const UniformMesh& mesh, const std::function<double(int, double)>& approx,
                const ScalarFunction& exact, const QuadratureRule& rule)
{
    const double h = mesh.h();
    double sum = 0.0;
    for (int j = 0; j < mesh.elements(); ++j) {
        const double xl = mesh.node(static_cast<std::size_t>(j));
        double element = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = xl + 0.5 * (rule.points[q] + 1.0) * h;
            const double d = approx(j, x) - exact(x);
            element += rule.weights[q] * d * d;
        }
        sum += element * 0.5 * h;
    }
    return std::sqrt(sum);
}

double l2_error(const NodalField& g, const ScalarFunction& exact, const QuadratureRule& rule)
{
    const double h = g.mesh.h();
    return l2_error(
        g.mesh,
        [&](int j, double x) {
            const auto ju = static_cast<std::size_t>(j);
            const double s = (x - g.mesh.node(ju)) / h;
            return g[ju] * (1.0 - s) + g[ju + 1] * s;
        },
        exact, rule);
}

double l2_norm(const NodalField& g)
{
    // Exact for piecewise-linear g: h/3 (a^2 + ab + b^2) per element.
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
        sum += g[j] * g[j] + g[j] * g[j + 1] + g[j + 1] * g[j + 1];
    }
    return std::sqrt(sum * g.mesh.h() / 3.0);
}

double max_node_deviation(const NodalField& g, double c)
{
    double m = 0.0;
    for (double v : g.coeffs) {
        m = std::max(m, std::abs(v - c));
    }
    return m;
}

} // namespace swcbc::fem
