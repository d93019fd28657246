#pragma once

#include "swcbc/errors.hpp"
#include "swcbc/schemes.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace swcbc::timeint {

/// t^n = t0 + n k, n = 0..M, with M k = T - t0.
struct TimeGrid
{
    double t0 = 0.0;
    double T = 1.0;
    double k = 0.0;
    int M = 0;

    /// Throws ConfigError unless k > 0, T > t0 and (T - t0)/k is an integer to within
    /// 1e-12 (T - t0).
    static TimeGrid make(double t0, double T, double k);
    /// Grid with exactly M steps.
    static TimeGrid with_steps(double t0, double T, int M);

    double time(int n) const { return n == M ? T : t0 + n * k; }
};

/// `Classical` is the standard four-stage Runge-Kutta method. `AsPrinted` reproduces the
/// typeset variant whose stage values use f(t + k/2, y^n) and f(t + k, y^{n,2}) while the
/// final combination uses f(t^n, y^n) and f(t^n + k/2, y^{n,2}); it is only second order
/// for non-autonomous right-hand sides and exists to document that difference.
enum class Rk4Form { Classical, AsPrinted };

/// When the algebraic boundary closure is re-applied inside a step.
enum class ClosureTiming { Stage, Step };

inline void add_scaled(double& y, double a, double x) { y += a * x; }
inline bool all_finite(double y) { return std::isfinite(y); }
bool all_finite(const schemes::SchemeState& s);
double max_abs(const schemes::SchemeState& s);

/// One step of the four-stage Runge-Kutta method for y' = f(t, y).
/// `close(state)` is applied to every intermediate stage value and to the result.
/// Throws NonFinite if a stage produces a non-finite value.
template <class State, class Rhs, class Close>
State rk4_step(const Rhs& f, const State& y, double t, double k, const Close& close,
               Rk4Form form = Rk4Form::Classical)
{
    using schemes::add_scaled;
    using timeint::add_scaled;
    auto check = [](const State& s) {
        if (!all_finite(s)) {
            throw NonFinite("Runge-Kutta stage produced a non-finite value");
        }
    };

    const double half = t + 0.5 * k;
    const bool printed = form == Rk4Form::AsPrinted;
    auto eval = [&](double at, const State& s) {
        State r = f(at, s);
        check(r);
        return r;
    };

    const State k1 = eval(t, y);
    State y1 = y;
    add_scaled(y1, 0.5 * k, printed ? eval(half, y) : k1);
    close(y1);
    const State k2 = eval(half, y1);

    State y2 = y;
    add_scaled(y2, 0.5 * k, k2);
    close(y2);
    const State k3 = eval(half, y2);

    State y3 = y;
    add_scaled(y3, k, printed ? eval(t + k, y2) : k3);
    close(y3);
    const State k4 = eval(t + k, y3);

    State next = y;
    add_scaled(next, k / 6.0, k1);
    add_scaled(next, k / 3.0, k2);
    add_scaled(next, k / 3.0, k3);
    add_scaled(next, k / 6.0, k4);
    close(next);
    check(next);
    return next;
}

template <class State, class Rhs>
State rk4_step(const Rhs& f, const State& y, double t, double k, Rk4Form form = Rk4Form::Classical)
{
    return rk4_step(f, y, t, k, [](State&) {}, form);
}

/// A diagnostic sampled every `period` time units, or at the listed `times` when that is
/// non-empty. Periods and times must fall on the time grid.
struct Observer
{
    std::string name;
    double period = 0.0;
    std::function<std::vector<double>(const schemes::SchemeState&)> sample;
    std::vector<double> times;
};

struct Series
{
    std::string name;
    std::vector<double> t;
    std::vector<std::vector<double>> values;
};

struct RunStatus
{
    bool completed = true;
    double blew_up_at = 0.0; // meaningful when !completed

    static RunStatus ok() { return {}; }
    static RunStatus blew_up(double t) { return {false, t}; }
};

struct RunResult
{
    schemes::SchemeState final_state; // last state that passed the blow-up checks
    std::vector<Series> observations;
    RunStatus status;
    int steps_taken = 0;

    const Series& series(const std::string& name) const;
};

struct IntegrateOptions
{
    ClosureTiming closure = ClosureTiming::Stage;
    Rk4Form form = Rk4Form::Classical;
    double blowup_threshold = 1e10;
};

/// Advances `init` over `grid` with the configured scheme. Instability (non-finite values,
/// magnitudes above the blow-up threshold, or a dry state) ends the run with status
/// blew_up(t); configuration problems throw.
RunResult integrate(const schemes::SchemeConfig& cfg, schemes::SchemeState init,
                    const TimeGrid& grid, const std::vector<Observer>& observers = {},
                    const IntegrateOptions& options = {});

/// Same, reusing an already constructed operator.
RunResult integrate(const schemes::SemiDiscreteOperator& op, schemes::SchemeState init,
                    const TimeGrid& grid, const std::vector<Observer>& observers = {},
                    const IntegrateOptions& options = {});

} // namespace swcbc::timeint
