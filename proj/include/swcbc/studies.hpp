#pragma once

#include "swcbc/fem.hpp"
#include "swcbc/manufactured.hpp"
#include "swcbc/schemes.hpp"
#include "swcbc/time_integration.hpp"

#include <optional>
#include <string>
#include <vector>

namespace swcbc::studies {

/// Physical initial profiles: (eta, u) for the nondimensional variants, (h, u) for the
/// dimensional one.
struct InitialData
{
    fem::ScalarFunction first;
    fem::ScalarFunction second;
};

/// Far field plus a Gaussian bump: first = base1 + amp1 exp(-width (x - center)^2), etc.
InitialData gaussian_pulse(double base1, double amp1, double base2, double amp2,
                           double width = 400.0, double center = 0.5);
/// Constant state.
InitialData uniform_state(double first, double second);
/// h = base + amp sin(pi (x + half_width) / (2 half_width)) for |x| <= half_width, base
/// elsewhere; u = 0.
InitialData half_sine_pulse(double base, double amp, double half_width = 0.3);

/// Projects the initial data into the variables of cfg.variant and applies its boundary
/// closure. Elevation and velocity (or their deviations) are projected onto the full space
/// and the closure then fixes the Dirichlet or characteristic nodes; the diagonal scheme's
/// invariants are projected onto their constrained spaces.
schemes::SchemeState make_initial_state(const schemes::SchemeConfig& cfg,
                                        const fem::UniformMesh& mesh, const InitialData& data);

/// Initial data of a manufactured case at time t.
InitialData exact_initial_data(const ManufacturedCase& c, double t = 0.0);

/// What the diagonal scheme's error norms measure. The first two reconstruct (eta_h, u_h)
/// from (v_h, w_h); `Invariants` measures 2 v_h and 2 w_h against 2 v and 2 w directly,
/// the scaling of the published diagonal convergence table. Other variants always report
/// physical errors.
enum class Reconstruction {
    Pointwise,  // evaluate the inverse transform at each quadrature point
    Nodal,      // transform nodal values, then interpolate linearly
    Invariants, // no reconstruction
};

/// L2 errors of the physical components of `state` against the case's exact solution at
/// time state.t.
std::pair<double, double> mms_errors(const ManufacturedCase& c, const schemes::SchemeState& state,
                                     Reconstruction mode = Reconstruction::Pointwise);

/// L2 norm of the difference of the physical elevation (or height) of two states on the
/// same mesh.
double elevation_difference(const schemes::SchemeConfig& cfg, const schemes::SchemeState& a,
                            const schemes::SchemeState& b,
                            Reconstruction mode = Reconstruction::Pointwise);

/// log(e_prev / e_cur) / log(n_cur / n_prev) over consecutive rows.
double observed_order(double e_prev, double e_cur, double n_prev, double n_cur);

struct ConvergenceRow
{
    int N = 0;
    double error_first = 0.0;
    std::optional<double> order_first;
    double error_second = 0.0;
    std::optional<double> order_second;
};

struct ConvergenceTable
{
    std::vector<ConvergenceRow> rows;
};

struct StudyOptions
{
    timeint::IntegrateOptions integrate;
    Reconstruction reconstruction = Reconstruction::Pointwise;
    int jobs = 1;
};

/// For each N: h = 1/N, k = h/k_div, project exact initial data, integrate to T and record
/// the L2 errors of (eta, u). Throws ConfigError if any run blows up.
ConvergenceTable run_convergence(const ManufacturedCase& c, const std::vector<int>& Ns,
                                 double k_div, double T, const StudyOptions& options = {});

struct TemporalRow
{
    double k_div = 0.0; // k = h / k_div
    double k = 0.0;
    double e_star = 0.0; // || H(k) - H(k_ref) ||
    std::optional<double> order;
    double e_exact = 0.0; // || H(k) - eta(T) ||
};

struct TemporalTable
{
    double h = 0.0;
    double k_ref = 0.0;
    std::vector<TemporalRow> rows;
};

/// Temporal order on a fixed mesh with N elements: a reference run at k_ref = h/k_ref_div
/// and, for each k = h/k_div, the elevation difference to the reference.
TemporalTable run_temporal_order(const ManufacturedCase& c, int N,
                                 const std::vector<double>& k_divs, double k_ref_div, double T,
                                 const StudyOptions& options = {});

struct ResidualSample
{
    double t = 0.0;
    double dev_first = 0.0;  // max_i |first_i - far field|
    double dev_second = 0.0; // max_i |second_i - far field|
    double criticality = 0.0;
    std::optional<double> energy;
};

struct ResidualHistory
{
    std::vector<ResidualSample> samples;
    timeint::RunStatus status;

    /// Sample nearest to t.
    const ResidualSample& at(double t) const;
};

/// Far-field reference values (first, second) of a configuration.
std::pair<double, double> far_field(const schemes::SchemeConfig& cfg);

/// Deviation of the physical fields from the far field, criticality, and (optionally) the
/// energy of the perturbation, every sample_period.
ResidualHistory run_absorption(const schemes::SchemeConfig& cfg,
                               const schemes::SchemeState& initial, const timeint::TimeGrid& grid,
                               double sample_period, bool with_energy = false,
                               const timeint::IntegrateOptions& options = {});

struct StabilityEntry
{
    double ratio = 0.0; // requested k/h
    double k = 0.0;     // step used: the largest k <= ratio h dividing T
    bool stable = false;
    double measure = 0.0; // residual or error at T (infinite after blow-up)
    std::optional<double> blew_up_at;
};

struct StabilitySweep
{
    std::vector<StabilityEntry> entries;
    std::optional<double> largest_stable;
};

/// Runs each ratio to T; stable iff no blow-up and max_i |first_i - far field| <= bound.
StabilitySweep run_stability_sweep(const schemes::SchemeConfig& cfg, const fem::UniformMesh& mesh,
                                   const InitialData& initial, const std::vector<double>& ratios,
                                   double T, double residual_bound,
                                   const StudyOptions& options = {});

/// MMS form of the sweep: the measure is the elevation L2 error at T.
StabilitySweep run_stability_sweep(const ManufacturedCase& c, int N,
                                   const std::vector<double>& ratios, double T,
                                   double error_bound, const StudyOptions& options = {});

struct ComparisonRow
{
    double t = 0.0;
    double eps = 0.0; // max_i |eta_h - eta_hD|
    double e = 0.0;   // max_i |u_h - u_hD|
};

/// Runs the direct and diagonal subcritical schemes from the same physical data and
/// compares nodal values at the requested times (each a multiple of k).
std::vector<ComparisonRow> compare_direct_vs_diagonal(const schemes::PhysicalParams& params,
                                                      const fem::UniformMesh& mesh,
                                                      const InitialData& initial, double k,
                                                      const std::vector<double>& sample_times,
                                                      const timeint::IntegrateOptions& options = {});

struct Snapshot
{
    double t = 0.0;
    schemes::SchemeState state; // physical variables
};

struct ProbeTrace
{
    double x = 0.0;
    std::vector<double> t;
    std::vector<double> first;
    std::vector<double> second;
};

struct TrajectoryRecord
{
    std::string label;
    std::vector<ProbeTrace> probes;
    std::vector<Snapshot> snapshots;
    timeint::RunStatus status;
};

struct ReflectionResult
{
    TrajectoryRecord nonlinear;
    TrajectoryRecord linearized;
};

/// Runs the same problem with nonlinear and linearized characteristic closures (the two
/// configs must differ only in bc_mode) and records probe time series every probe_period
/// and full snapshots at snapshot_times.
ReflectionResult run_reflection_experiment(const schemes::SchemeConfig& nonlinear_cfg,
                                           const schemes::SchemeConfig& linearized_cfg,
                                           const fem::UniformMesh& mesh,
                                           const InitialData& initial,
                                           const timeint::TimeGrid& grid,
                                           const std::vector<double>& probes,
                                           double probe_period,
                                           const std::vector<double>& snapshot_times,
                                           const timeint::IntegrateOptions& options = {});

/// Evolves one configuration and records snapshots (physical variables) at the given times.
TrajectoryRecord run_evolution(const schemes::SchemeConfig& cfg, const fem::UniformMesh& mesh,
                               const InitialData& initial, const timeint::TimeGrid& grid,
                               const std::vector<double>& snapshot_times,
                               const std::vector<double>& probes = {}, double probe_period = 0.0,
                               const timeint::IntegrateOptions& options = {});

/// Impulse forcing F(x,t) = amplitude sin(pi t) on [-half_width, half_width] x [0, duration].
schemes::SpaceTimeFunction impulse_forcing(double amplitude, double half_width = 0.1,
                                           double duration = 1.0);

} // namespace swcbc::studies
