#include "swcbc/studies.hpp"

#include "swcbc/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace swcbc::studies {

using schemes::SchemeConfig;
using schemes::SchemeState;
using schemes::StateKind;
using schemes::Variant;

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; results land at their input index.
template <class Result, class Fn>
std::vector<Result> parallel_map(int jobs, std::size_t n, Fn fn)
{
    std::vector<std::optional<Result>> slots(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            slots[i].emplace(fn(i));
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    slots[i].emplace(fn(i));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::jthread> pool;
        for (int w = 0; w < std::min<int>(jobs, static_cast<int>(n)); ++w) {
            pool.emplace_back(worker);
        }
        pool.clear();
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    std::vector<Result> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

/// Physical (first, second) values of a state at x inside element j.
class PhysicalView
{
public:
    PhysicalView(const SchemeConfig& cfg, const SchemeState& s, Reconstruction mode)
        : cfg_(cfg), state_(mode == Reconstruction::Nodal ? schemes::to_physical(s, cfg) : s),
          transform_(mode != Reconstruction::Nodal)
    {}

    std::pair<double, double> operator()(int j, double x) const
    {
        const auto& mesh = state_.mesh();
        const auto ju = static_cast<std::size_t>(j);
        const double s = (x - mesh.node(ju)) / mesh.h();
        const double a = state_.first[ju] + s * (state_.first[ju + 1] - state_.first[ju]);
        const double b = state_.second[ju] + s * (state_.second[ju + 1] - state_.second[ju]);
        if (!transform_) {
            return {a, b};
        }
        const auto& p = cfg_.params;
        switch (cfg_.variant) {
        case Variant::SupercriticalHomogenized:
            return {a + p.eta0, b + p.u0};
        case Variant::SubcriticalDiagonal: {
            const auto phys = schemes::riemann_inverse(a, b, p);
            return {phys.eta, phys.u};
        }
        default:
            return {a, b};
        }
    }

private:
    const SchemeConfig& cfg_;
    SchemeState state_;
    bool transform_;
};

fem::UniformMesh unit_mesh(int N) { return fem::UniformMesh(0.0, 1.0, N); }

double ratio_step(double h, double div) { return h / div; }

} // namespace

InitialData gaussian_pulse(double base1, double amp1, double base2, double amp2, double width,
                           double center)
{
    return {
        [=](double x) { return base1 + amp1 * std::exp(-width * (x - center) * (x - center)); },
        [=](double x) { return base2 + amp2 * std::exp(-width * (x - center) * (x - center)); },
    };
}

InitialData uniform_state(double first, double second)
{
    return {[first](double) { return first; }, [second](double) { return second; }};
}

InitialData half_sine_pulse(double base, double amp, double half_width)
{
    return {
        [=](double x) {
            if (std::abs(x) > half_width) {
                return base;
            }
            return base + amp * std::sin(std::numbers::pi * (x + half_width) / (2.0 * half_width));
        },
        [](double) { return 0.0; },
    };
}

SpaceTimeFunction impulse_forcing(double amplitude, double half_width, double duration)
{
    return [=](double x, double t) {
        if (std::abs(x) > half_width || t < 0.0 || t > duration) {
            return 0.0;
        }
        return amplitude * std::sin(std::numbers::pi * t);
    };
}

SchemeState make_initial_state(const SchemeConfig& cfg, const fem::UniformMesh& mesh,
                               const InitialData& data)
{
    const auto& p = cfg.params;
    const auto kind = schemes::state_kind(cfg.variant);
    SchemeState s = [&] {
        switch (cfg.variant) {
        case Variant::SupercriticalHomogenized: {
            // Deviations from the far field; the Dirichlet nodes are set by the closure.
            auto f = data.first;
            auto g = data.second;
            return SchemeState(kind,
                               fem::l2_project([&](double x) { return f(x) - p.eta0; }, mesh),
                               fem::l2_project([&](double x) { return g(x) - p.u0; }, mesh));
        }
        case Variant::SubcriticalDiagonal:
            return SchemeState(
                kind,
                fem::l2_project(
                    [&](double x) {
                        return schemes::riemann_forward(data.first(x), data.second(x), p).v;
                    },
                    mesh, fem::BoundaryMask::left(), std::pair{0.0, 0.0}),
                fem::l2_project(
                    [&](double x) {
                        return schemes::riemann_forward(data.first(x), data.second(x), p).w;
                    },
                    mesh, fem::BoundaryMask::right(), std::pair{0.0, 0.0}));
        case Variant::SupercriticalDirect:
        case Variant::SubcriticalDirect:
        case Variant::Dimensional:
            break;
        }
        return SchemeState(kind, fem::l2_project(data.first, mesh),
                           fem::l2_project(data.second, mesh));
    }();
    schemes::SemiDiscreteOperator(cfg, mesh).close_boundary(s);
    return s;
}

InitialData exact_initial_data(const ManufacturedCase& c, double t)
{
    auto eta = c.exact_eta;
    auto u = c.exact_u;
    return {[eta, t](double x) { return eta(x, t); }, [u, t](double x) { return u(x, t); }};
}

std::pair<double, double> mms_errors(const ManufacturedCase& c, const SchemeState& state,
                                     Reconstruction mode)
{
    const auto rule = fem::gauss_rule(5);
    const double t = state.t;
    if (mode == Reconstruction::Invariants && c.cfg.variant == Variant::SubcriticalDiagonal) {
        const auto& v = c.exact_first;
        const auto& w = c.exact_second;
        return {2.0 * fem::l2_error(state.first, [&](double x) { return v(x, t); }, rule),
                2.0 * fem::l2_error(state.second, [&](double x) { return w(x, t); }, rule)};
    }
    const PhysicalView view(c.cfg, state, mode);
    const auto& eta = c.exact_eta;
    const auto& u = c.exact_u;
    const double e1 = fem::l2_error(
        state.mesh(), [&](int j, double x) { return view(j, x).first; },
        [&](double x) { return eta(x, t); }, rule);
    const double e2 = fem::l2_error(
        state.mesh(), [&](int j, double x) { return view(j, x).second; },
        [&](double x) { return u(x, t); }, rule);
    return {e1, e2};
}

double elevation_difference(const SchemeConfig& cfg, const SchemeState& a, const SchemeState& b,
                            Reconstruction mode)
{
    const PhysicalView va(cfg, a, mode);
    const PhysicalView vb(cfg, b, mode);
    const auto rule = fem::gauss_rule(5);
    const double h = a.mesh().h();
    double sum = 0.0;
    for (int j = 0; j < a.mesh().elements(); ++j) {
        const double xl = a.mesh().node(static_cast<std::size_t>(j));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = xl + 0.5 * (rule.points[q] + 1.0) * h;
            const double d = va(j, x).first - vb(j, x).first;
            sum += 0.5 * h * rule.weights[q] * d * d;
        }
    }
    return std::sqrt(sum);
}

double observed_order(double e_prev, double e_cur, double n_prev, double n_cur)
{
    return std::log(e_prev / e_cur) / std::log(n_cur / n_prev);
}

namespace {

SchemeState run_case_to(const ManufacturedCase& c, int N, double k, double T,
                        const timeint::IntegrateOptions& options)
{
    const auto mesh = unit_mesh(N);
    auto init = make_initial_state(c.cfg, mesh, exact_initial_data(c));
    const auto grid = timeint::TimeGrid::make(0.0, T, k);
    auto run = timeint::integrate(c.cfg, std::move(init), grid, {}, options);
    if (!run.status.completed) {
        throw ConfigError("case '" + c.name + "' blew up at t = " +
                          std::to_string(run.status.blew_up_at) + " (N = " + std::to_string(N) +
                          ", k = " + std::to_string(k) + ")");
    }
    return std::move(run.final_state);
}

} // namespace

ConvergenceTable run_convergence(const ManufacturedCase& c, const std::vector<int>& Ns,
                                 double k_div, double T, const StudyOptions& options)
{
    auto errors = parallel_map<std::pair<double, double>>(
        options.jobs, Ns.size(), [&](std::size_t i) {
            const int N = Ns[i];
            const auto final_state =
                run_case_to(c, N, ratio_step(1.0 / N, k_div), T, options.integrate);
            return mms_errors(c, final_state, options.reconstruction);
        });

    ConvergenceTable table;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        ConvergenceRow row{Ns[i], errors[i].first, std::nullopt, errors[i].second, std::nullopt};
        if (i > 0) {
            row.order_first = observed_order(errors[i - 1].first, errors[i].first, Ns[i - 1], Ns[i]);
            row.order_second =
                observed_order(errors[i - 1].second, errors[i].second, Ns[i - 1], Ns[i]);
        }
        table.rows.push_back(row);
    }
    return table;
}

TemporalTable run_temporal_order(const ManufacturedCase& c, int N, const std::vector<double>& k_divs,
                                 double k_ref_div, double T, const StudyOptions& options)
{
    const double h = 1.0 / N;
    TemporalTable table;
    table.h = h;
    table.k_ref = h / k_ref_div;

    // Index 0 is the reference run.
    std::vector<double> divs{k_ref_div};
    divs.insert(divs.end(), k_divs.begin(), k_divs.end());
    auto finals = parallel_map<SchemeState>(options.jobs, divs.size(), [&](std::size_t i) {
        return run_case_to(c, N, h / divs[i], T, options.integrate);
    });

    for (std::size_t i = 1; i < divs.size(); ++i) {
        TemporalRow row;
        row.k_div = divs[i];
        row.k = h / divs[i];
        row.e_star = elevation_difference(c.cfg, finals[i], finals[0], options.reconstruction);
        row.e_exact = mms_errors(c, finals[i], options.reconstruction).first;
        if (!table.rows.empty() && table.rows.back().e_star > 0.0 && row.e_star > 0.0) {
            const auto& prev = table.rows.back();
            row.order = observed_order(prev.e_star, row.e_star, prev.k_div, row.k_div);
        }
        table.rows.push_back(row);
    }
    return table;
}

const ResidualSample& ResidualHistory::at(double t) const
{
    if (samples.empty()) {
        throw ConfigError("empty residual history");
    }
    return *std::min_element(samples.begin(), samples.end(), [t](const auto& a, const auto& b) {
        return std::abs(a.t - t) < std::abs(b.t - t);
    });
}

std::pair<double, double> far_field(const SchemeConfig& cfg)
{
    if (cfg.variant == Variant::Dimensional) {
        return {cfg.params.h0, cfg.params.u0};
    }
    return {cfg.params.eta0, cfg.params.u0};
}

ResidualHistory run_absorption(const SchemeConfig& cfg, const SchemeState& initial,
                               const timeint::TimeGrid& grid, double sample_period,
                               bool with_energy, const timeint::IntegrateOptions& options)
{
    const auto [ref1, ref2] = far_field(cfg);
    timeint::Observer obs{"residual", sample_period, [&, ref1, ref2](const SchemeState& s) {
                              const auto phys = schemes::to_physical(s, cfg);
                              std::vector<double> out{fem::max_node_deviation(phys.first, ref1),
                                                      fem::max_node_deviation(phys.second, ref2),
                                                      schemes::criticality_monitor(s, cfg)};
                              if (with_energy) {
                                  auto pert = phys;
                                  for (std::size_t i = 0; i < pert.first.size(); ++i) {
                                      pert.first[i] -= ref1;
                                      pert.second[i] -= ref2;
                                  }
                                  out.push_back(schemes::energy_integral(pert, cfg.params));
                              }
                              return out;
                          }, {}};
    const auto run = timeint::integrate(cfg, initial, grid, {obs}, options);

    ResidualHistory history;
    history.status = run.status;
    const auto& series = run.observations.front();
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const auto& v = series.values[i];
        ResidualSample sample{series.t[i], v[0], v[1], v[2], std::nullopt};
        if (with_energy) {
            sample.energy = v[3];
        }
        history.samples.push_back(sample);
    }
    return history;
}

namespace {

StabilitySweep classify(const std::vector<double>& ratios, std::vector<StabilityEntry> entries)
{
    StabilitySweep sweep;
    sweep.entries = std::move(entries);
    for (const auto& e : sweep.entries) {
        if (e.stable) {
            sweep.largest_stable = e.ratio;
        }
    }
    (void)ratios;
    return sweep;
}

/// Grid over [0, T] whose step is the largest k <= ratio h that divides T.
timeint::TimeGrid sweep_grid(double ratio, double h, double T)
{
    if (!(ratio > 0.0)) {
        throw ConfigError("stability ratios must be positive");
    }
    const int M = static_cast<int>(std::ceil(T / (ratio * h) - 1e-9));
    return timeint::TimeGrid::with_steps(0.0, T, std::max(M, 1));
}

void require_sorted(const std::vector<double>& ratios)
{
    if (!std::is_sorted(ratios.begin(), ratios.end())) {
        throw ConfigError("stability ratios must be sorted ascending");
    }
}

} // namespace

StabilitySweep run_stability_sweep(const SchemeConfig& cfg, const fem::UniformMesh& mesh,
                                   const InitialData& initial, const std::vector<double>& ratios,
                                   double T, double residual_bound, const StudyOptions& options)
{
    require_sorted(ratios);
    const auto init = make_initial_state(cfg, mesh, initial);
    const double ref = far_field(cfg).first;
    auto entries = parallel_map<StabilityEntry>(options.jobs, ratios.size(), [&](std::size_t i) {
        StabilityEntry e;
        e.ratio = ratios[i];
        const auto grid = sweep_grid(ratios[i], mesh.h(), T);
        e.k = grid.k;
        const auto run = timeint::integrate(cfg, init, grid, {}, options.integrate);
        if (!run.status.completed) {
            e.blew_up_at = run.status.blew_up_at;
            e.measure = std::numeric_limits<double>::infinity();
            return e;
        }
        e.measure = fem::max_node_deviation(schemes::to_physical(run.final_state, cfg).first, ref);
        e.stable = e.measure <= residual_bound;
        return e;
    });
    return classify(ratios, std::move(entries));
}

StabilitySweep run_stability_sweep(const ManufacturedCase& c, int N,
                                   const std::vector<double>& ratios, double T,
                                   double error_bound, const StudyOptions& options)
{
    require_sorted(ratios);
    const auto mesh = unit_mesh(N);
    const auto init = make_initial_state(c.cfg, mesh, exact_initial_data(c));
    auto entries = parallel_map<StabilityEntry>(options.jobs, ratios.size(), [&](std::size_t i) {
        StabilityEntry e;
        e.ratio = ratios[i];
        const auto grid = sweep_grid(ratios[i], mesh.h(), T);
        e.k = grid.k;
        const auto run = timeint::integrate(c.cfg, init, grid, {}, options.integrate);
        if (!run.status.completed) {
            e.blew_up_at = run.status.blew_up_at;
            e.measure = std::numeric_limits<double>::infinity();
            return e;
        }
        e.measure = mms_errors(c, run.final_state, options.reconstruction).first;
        e.stable = e.measure <= error_bound;
        return e;
    });
    return classify(ratios, std::move(entries));
}

std::vector<ComparisonRow> compare_direct_vs_diagonal(const schemes::PhysicalParams& params,
                                                      const fem::UniformMesh& mesh,
                                                      const InitialData& initial, double k,
                                                      const std::vector<double>& sample_times,
                                                      const timeint::IntegrateOptions& options)
{
    if (sample_times.empty()) {
        throw ConfigError("comparison needs at least one sample time");
    }
    const double T = *std::max_element(sample_times.begin(), sample_times.end());
    const auto grid = timeint::TimeGrid::make(0.0, T, k);

    SchemeConfig direct;
    direct.variant = Variant::SubcriticalDirect;
    direct.params = params;
    SchemeConfig diagonal = direct;
    diagonal.variant = Variant::SubcriticalDiagonal;

    auto snapshot = [](const SchemeConfig& cfg) {
        return [&cfg](const SchemeState& s) {
            const auto phys = schemes::to_physical(s, cfg);
            std::vector<double> out = phys.first.coeffs;
            out.insert(out.end(), phys.second.coeffs.begin(), phys.second.coeffs.end());
            return out;
        };
    };
    timeint::Observer obs_direct{"nodes", 0.0, snapshot(direct), sample_times};
    timeint::Observer obs_diag{"nodes", 0.0, snapshot(diagonal), sample_times};

    const auto run_direct = timeint::integrate(direct, make_initial_state(direct, mesh, initial),
                                               grid, {obs_direct}, options);
    const auto run_diag = timeint::integrate(diagonal, make_initial_state(diagonal, mesh, initial),
                                             grid, {obs_diag}, options);
    if (!run_direct.status.completed || !run_diag.status.completed) {
        throw ConfigError("a comparison run blew up");
    }

    const auto& a = run_direct.observations.front();
    const auto& b = run_diag.observations.front();
    const std::size_t n = mesh.node_count();
    std::vector<ComparisonRow> rows;
    for (std::size_t s = 0; s < a.t.size(); ++s) {
        ComparisonRow row{a.t[s], 0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            row.eps = std::max(row.eps, std::abs(a.values[s][i] - b.values[s][i]));
            row.e = std::max(row.e, std::abs(a.values[s][n + i] - b.values[s][n + i]));
        }
        rows.push_back(row);
    }
    return rows;
}

TrajectoryRecord run_evolution(const SchemeConfig& cfg, const fem::UniformMesh& mesh,
                               const InitialData& initial, const timeint::TimeGrid& grid,
                               const std::vector<double>& snapshot_times,
                               const std::vector<double>& probes, double probe_period,
                               const timeint::IntegrateOptions& options)
{
    std::vector<timeint::Observer> observers;
    if (!snapshot_times.empty()) {
        observers.push_back({"snapshot", 0.0,
                             [&cfg](const SchemeState& s) {
                                 const auto phys = schemes::to_physical(s, cfg);
                                 std::vector<double> out = phys.first.coeffs;
                                 out.insert(out.end(), phys.second.coeffs.begin(),
                                            phys.second.coeffs.end());
                                 return out;
                             },
                             snapshot_times});
    }
    if (!probes.empty()) {
        if (!(probe_period > 0.0)) {
            throw ConfigError("probes need a positive sampling period");
        }
        observers.push_back({"probes", probe_period, [&cfg, &probes](const SchemeState& s) {
                                 const auto phys = schemes::to_physical(s, cfg);
                                 std::vector<double> out;
                                 for (double x : probes) {
                                     out.push_back(fem::eval_field(phys.first, x));
                                     out.push_back(fem::eval_field(phys.second, x));
                                 }
                                 return out;
                             }, {}});
    }

    const auto run = timeint::integrate(cfg, make_initial_state(cfg, mesh, initial), grid,
                                        observers, options);

    TrajectoryRecord rec;
    rec.label = std::string(schemes::to_string(cfg.bc_mode));
    rec.status = run.status;
    const std::size_t n = mesh.node_count();
    const auto kind = cfg.variant == Variant::Dimensional ? StateKind::DimensionalHU
                                                          : StateKind::EtaU;
    for (const auto& series : run.observations) {
        if (series.name == "snapshot") {
            for (std::size_t s = 0; s < series.t.size(); ++s) {
                const auto& v = series.values[s];
                std::vector<double> first(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
                std::vector<double> second(v.begin() + static_cast<std::ptrdiff_t>(n), v.end());
                rec.snapshots.push_back(
                    {series.t[s], SchemeState(kind, fem::NodalField(mesh, std::move(first)),
                                              fem::NodalField(mesh, std::move(second)),
                                              series.t[s])});
            }
        } else {
            for (std::size_t p = 0; p < probes.size(); ++p) {
                ProbeTrace trace{probes[p], series.t, {}, {}};
                for (const auto& v : series.values) {
                    trace.first.push_back(v[2 * p]);
                    trace.second.push_back(v[2 * p + 1]);
                }
                rec.probes.push_back(std::move(trace));
            }
        }
    }
    return rec;
}

ReflectionResult run_reflection_experiment(const SchemeConfig& nonlinear_cfg,
                                           const SchemeConfig& linearized_cfg,
                                           const fem::UniformMesh& mesh,
                                           const InitialData& initial,
                                           const timeint::TimeGrid& grid,
                                           const std::vector<double>& probes, double probe_period,
                                           const std::vector<double>& snapshot_times,
                                           const timeint::IntegrateOptions& options)
{
    if (nonlinear_cfg.variant != linearized_cfg.variant ||
        nonlinear_cfg.bc_mode != schemes::BcMode::NonlinearCharacteristic ||
        linearized_cfg.bc_mode != schemes::BcMode::LinearizedCharacteristic) {
        throw ConfigError("reflection experiment needs one nonlinear and one linearized "
                          "configuration of the same variant");
    }
    ReflectionResult r;
    r.nonlinear = run_evolution(nonlinear_cfg, mesh, initial, grid, snapshot_times, probes,
                                probe_period, options);
    r.linearized = run_evolution(linearized_cfg, mesh, initial, grid, snapshot_times, probes,
                                 probe_period, options);
    return r;
}

} // namespace swcbc::studies
