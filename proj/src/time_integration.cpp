#include "swcbc/time_integration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swcbc::timeint {

using schemes::SchemeState;

TimeGrid TimeGrid::make(double t0, double T, double k)
{
    if (!(k > 0.0)) {
        throw ConfigError("time step must be positive");
    }
    if (!(T > t0)) {
        throw ConfigError("final time must exceed the initial time");
    }
    const double span = T - t0;
    const double steps = std::round(span / k);
    if (steps < 1.0 || std::abs(steps * k - span) > 1e-12 * std::max(std::abs(T), span)) {
        throw ConfigError("time step " + std::to_string(k) + " does not divide the interval [" +
                          std::to_string(t0) + ", " + std::to_string(T) + "]");
    }
    return TimeGrid{t0, T, k, static_cast<int>(steps)};
}

TimeGrid TimeGrid::with_steps(double t0, double T, int M)
{
    if (M < 1 || !(T > t0)) {
        throw ConfigError("time grid needs M >= 1 and T > t0");
    }
    return TimeGrid{t0, T, (T - t0) / M, M};
}

bool all_finite(const SchemeState& s)
{
    for (std::size_t i = 0; i < s.first.size(); ++i) {
        if (!std::isfinite(s.first[i]) || !std::isfinite(s.second[i])) {
            return false;
        }
    }
    return true;
}

double max_abs(const SchemeState& s)
{
    double m = 0.0;
    for (std::size_t i = 0; i < s.first.size(); ++i) {
        m = std::max({m, std::abs(s.first[i]), std::abs(s.second[i])});
    }
    return m;
}

const Series& RunResult::series(const std::string& name) const
{
    for (const auto& s : observations) {
        if (s.name == name) {
            return s;
        }
    }
    throw ConfigError("no observation series named '" + name + "'");
}

RunResult integrate(const schemes::SchemeConfig& cfg, SchemeState init, const TimeGrid& grid,
                    const std::vector<Observer>& observers, const IntegrateOptions& options)
{
    const schemes::SemiDiscreteOperator op(cfg, init.mesh());
    return integrate(op, std::move(init), grid, observers, options);
}

RunResult integrate(const schemes::SemiDiscreteOperator& op, SchemeState init,
                    const TimeGrid& grid, const std::vector<Observer>& observers,
                    const IntegrateOptions& options)
{
    // Per observer: a sampling stride, or an explicit sorted list of step indices.
    std::vector<int> strides;
    std::vector<std::vector<int>> at_steps;
    for (const auto& obs : observers) {
        auto to_steps = [&](double span) {
            const double ratio = span / grid.k;
            const double steps = std::round(ratio);
            if (std::abs(steps - ratio) > 1e-6 * std::max(1.0, ratio)) {
                throw ConfigError("observer '" + obs.name + "' time " + std::to_string(span) +
                                  " is not on the time grid");
            }
            return static_cast<int>(steps);
        };
        std::vector<int> steps;
        int stride = 0;
        if (obs.times.empty()) {
            stride = to_steps(obs.period);
            if (stride < 1) {
                throw ConfigError("observer '" + obs.name + "' needs a positive period");
            }
        } else {
            for (double t : obs.times) {
                if (t < grid.t0 || t > grid.T + 1e-12 * std::abs(grid.T)) {
                    throw ConfigError("observer '" + obs.name + "' time outside the run");
                }
                steps.push_back(to_steps(t - grid.t0));
            }
        }
        strides.push_back(stride);
        at_steps.push_back(std::move(steps));
    }

    RunResult result{init, {}, RunStatus::ok(), 0};
    for (const auto& obs : observers) {
        result.observations.push_back(Series{obs.name, {}, {}});
    }

    auto sample = [&](const SchemeState& s, int n) {
        for (std::size_t o = 0; o < observers.size(); ++o) {
            const bool due = strides[o] > 0
                                 ? n % strides[o] == 0
                                 : std::find(at_steps[o].begin(), at_steps[o].end(), n) !=
                                       at_steps[o].end();
            if (due) {
                result.observations[o].t.push_back(grid.time(n));
                result.observations[o].values.push_back(observers[o].sample(s));
            }
        }
    };

    const bool stage_closure = options.closure == ClosureTiming::Stage;
    auto close_stage = [&](SchemeState& s) {
        if (stage_closure) {
            op.close_boundary(s);
        }
    };
    auto rhs = [&](double t, const SchemeState& y) {
        if (t == y.t) {
            return op.derivative(y);
        }
        SchemeState at = y;
        at.t = t;
        return op.derivative(at);
    };

    SchemeState state = std::move(init);
    state.t = grid.t0;
    op.close_boundary(state);
    sample(state, 0);

    for (int n = 0; n < grid.M; ++n) {
        const double t = grid.time(n);
        const double t_next = grid.time(n + 1);
        try {
            SchemeState next = rk4_step(rhs, state, t, grid.k, close_stage, options.form);
            op.close_boundary(next);
            next.t = t_next;
            if (!all_finite(next) || max_abs(next) > options.blowup_threshold) {
                result.status = RunStatus::blew_up(t_next);
                break;
            }
            state = std::move(next);
        } catch (const NonFinite&) {
            result.status = RunStatus::blew_up(t_next);
            break;
        } catch (const DryState&) {
            result.status = RunStatus::blew_up(t_next);
            break;
        }
        result.steps_taken = n + 1;
        sample(state, n + 1);
    }
    result.final_state = std::move(state);
    return result;
}

} // namespace swcbc::timeint
