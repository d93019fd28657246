#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace swcbc::fem {

/// Uniform partition a = x_0 < x_1 < ... < x_N = b.
class UniformMesh
{
public:
    /// Throws InvalidMesh unless b > a and N >= 2.
    UniformMesh(double a, double b, int N);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int elements() const noexcept { return N_; }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(N_) + 1; }
    double h() const noexcept { return h_; }

    /// x_i = a + i h; the last node is pinned to b exactly.
    double node(std::size_t i) const noexcept
    {
        return i == static_cast<std::size_t>(N_) ? b_ : a_ + static_cast<double>(i) * h_;
    }
    std::vector<double> nodes() const;

    /// Index j of the element [x_j, x_{j+1}] containing x; nodes belong to the element on
    /// their left, except x_0. Throws OutOfDomain outside [a, b].
    int locate(double x) const;

    friend bool operator==(const UniformMesh&, const UniformMesh&) = default;

private:
    double a_;
    double b_;
    int N_;
    double h_;
};

UniformMesh build_mesh(double a, double b, int N);

/// Which ends of the mesh carry a prescribed (Dirichlet) nodal value.
struct BoundaryMask
{
    bool fix_left = false;
    bool fix_right = false;

    static constexpr BoundaryMask none() { return {false, false}; }
    static constexpr BoundaryMask left() { return {true, false}; }
    static constexpr BoundaryMask right() { return {false, true}; }
    static constexpr BoundaryMask both() { return {true, true}; }

    friend bool operator==(const BoundaryMask&, const BoundaryMask&) = default;
};

/// Continuous piecewise-linear function on a mesh, stored by its nodal values.
struct NodalField
{
    UniformMesh mesh;
    std::vector<double> coeffs;

    explicit NodalField(const UniformMesh& m, double value = 0.0)
        : mesh(m), coeffs(m.node_count(), value)
    {}
    NodalField(const UniformMesh& m, std::vector<double> values);

    std::size_t size() const noexcept { return coeffs.size(); }
    double& operator[](std::size_t i) { return coeffs[i]; }
    double operator[](std::size_t i) const { return coeffs[i]; }
    double front() const { return coeffs.front(); }
    double back() const { return coeffs.back(); }
};

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct QuadratureRule
{
    std::vector<double> points;
    std::vector<double> weights;
    int order = 0; // polynomial degree integrated exactly

    std::size_t size() const noexcept { return points.size(); }
};

/// n in {2, 3, 5}; anything else throws UnsupportedRule.
QuadratureRule gauss_rule(int n);

struct TridiagonalMatrix
{
    std::vector<double> sub;  // length n-1
    std::vector<double> diag; // length n
    std::vector<double> super;

    std::size_t size() const noexcept { return diag.size(); }
    std::vector<double> multiply(std::span<const double> x) const;
};

/// Gram matrix of the hat functions that are not removed by `mask`.
TridiagonalMatrix assemble_mass_matrix(const UniformMesh& mesh, BoundaryMask mask);

/// Thomas elimination without pivoting. Throws SingularMatrix on a pivot below 1e-300.
std::vector<double> solve_tridiagonal(const TridiagonalMatrix& T, std::span<const double> rhs);

/// Pre-factored tridiagonal solver for repeated solves against one matrix.
class TridiagonalSolver
{
public:
    explicit TridiagonalSolver(const TridiagonalMatrix& T);
    /// In-place solve.
    void solve(std::span<double> rhs) const;
    std::size_t size() const noexcept { return inv_pivot_.size(); }

private:
    std::vector<double> lower_;     // multipliers l_i = sub_{i-1} / pivot_{i-1}
    std::vector<double> inv_pivot_; // 1 / pivot_i
    std::vector<double> super_;
};

using ScalarFunction = std::function<double(double)>;

/// L2 projection onto the P1 functions whose masked nodes take `boundary_values` (left,
/// right): Galerkin conditions hold against the unmasked hats only, with loads from 5-point
/// Gauss per element. Throws MissingBoundaryValue if a masked node has no value supplied.
NodalField l2_project(const ScalarFunction& f, const UniformMesh& mesh, BoundaryMask mask = {},
                      std::optional<std::pair<double, double>> boundary_values = std::nullopt);

/// Nodal interpolant of f.
NodalField interpolate(const ScalarFunction& f, const UniformMesh& mesh);

double eval_field(const NodalField& g, double x);
/// Slope of the element containing x; at an interior node the left element is used.
double eval_deriv(const NodalField& g, double x);

/// L2 norm of (g - exact) by element-wise quadrature.
double l2_error(const NodalField& g, const ScalarFunction& exact, const QuadratureRule& rule);
/// Same, with an arbitrary approximation evaluated element-wise: approx(j, x) on element j.
double l2_error(const UniformMesh& mesh, const std::function<double(int, double)>& approx,
                const ScalarFunction& exact, const QuadratureRule& rule);
/// L2 norm of a P1 field (exact with the 2-point rule or better).
double l2_norm(const NodalField& g);

double max_node_deviation(const NodalField& g, double c);

/// (f, phi_i) for every node i by `rule` on each element.
std::vector<double> load_vector(const ScalarFunction& f, const UniformMesh& mesh,
                                const QuadratureRule& rule);

} // namespace swcbc::fem
