#pragma once

#include "swcbc/schemes.hpp"
#include "swcbc/studies.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace swcbc::cli {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Command { Convergence, TemporalOrder, Evolve, Absorption, Stability, Compare, Reflect };

std::string_view to_string(Command c);
/// Throws ValidationError("command").
Command parse_command(std::string_view s);

enum class InitialShape { Gaussian, Uniform, HalfSine };

std::string_view to_string(InitialShape s);
InitialShape parse_initial_shape(std::string_view s);

/// A fully resolved run description. Every field holds a concrete value after parsing, so
/// serialize() followed by parse_config() reproduces it exactly.
struct RunConfig
{
    Command command = Command::Convergence;

    // Scheme.
    schemes::Variant variant = schemes::Variant::SupercriticalDirect;
    schemes::BcMode bc_mode = schemes::BcMode::NonlinearCharacteristic;
    schemes::BoundaryCoupling coupling = schemes::BoundaryCoupling::Consistent;
    double eta0 = 1.0;
    double u0 = 3.0;
    double g = 9.8;
    double H = 0.2;
    double L = 1.0;
    double h0 = 0.2;
    double impulse_amplitude = 0.0;

    // Manufactured-solution studies.
    std::string case_name; // empty: no manufactured case
    std::vector<int> Ns{40, 80, 160, 320, 480, 520};
    std::vector<double> k_divs{35, 40, 45, 50, 55, 60, 64, 64.5, 65};
    double k_ref_div = 960.0;
    studies::Reconstruction reconstruction = studies::Reconstruction::Pointwise;

    // Mesh and time.
    int N = 2000;
    double k_div = 10.0; // k = h / k_div
    double T = 1.0;
    timeint::Rk4Form rk4_form = timeint::Rk4Form::Classical;
    timeint::ClosureTiming closure = timeint::ClosureTiming::Stage;

    // Initial data: first = base1 + amp1 * shape, second = base2 + amp2 * shape.
    InitialShape initial = InitialShape::Gaussian;
    double base1 = 1.0;
    double amp1 = 0.05;
    double base2 = 3.0;
    double amp2 = 0.1;
    double width = 400.0;
    double center = 0.5;
    double half_width = 0.3;

    // Diagnostics.
    double sample_period = 0.05;
    bool energy = false;
    std::vector<double> sample_times;
    std::vector<double> snapshot_times;
    std::vector<double> probes;
    double probe_period = 0.01;

    // Stability sweeps.
    std::vector<double> ratios{0.3, 0.5};
    double residual_bound = 1e-5;
    double error_bound = 1.243098e-2;
    /// Reference Courant ratio, recorded in outputs only (0.3695 for the supercritical
    /// Gaussian experiment).
    std::optional<double> courant_ratio;

    // Execution.
    std::string out = "out";
    int jobs = 1;

    bool operator==(const RunConfig&) const = default;
};

/// Manufactured cases accepted by the `case` key: the catalog plus
/// "supercritical_homogenized".
std::vector<std::string> case_names();
studies::ManufacturedCase load_case(std::string_view name);

/// Keys accepted in a config document, in serialization order.
const std::vector<std::string>& config_keys();

/// Parses a `key = value` document (one entry per line, `#` starts a comment, lists are
/// comma-separated) and then applies `overrides` (each "key=value") on top. Defaults that
/// depend on the variant (far-field values, initial-data bases and amplitudes) are filled in
/// for keys the document does not set, then the result is validated.
/// Throws ParseError (malformed line, unknown or repeated key, bad number; the message
/// carries the line number, or the override index) and ValidationError naming the key
/// that breaks a precondition.
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

/// Checks every precondition the run will rely on. Throws ValidationError(key).
void validate(const RunConfig& cfg);

/// Canonical `key = value` text for every key; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

/// Scheme configuration, mesh, step and initial data described by `cfg`.
schemes::SchemeConfig scheme_config(const RunConfig& cfg);
fem::UniformMesh run_mesh(const RunConfig& cfg);
double time_step(const RunConfig& cfg);
studies::InitialData initial_data(const RunConfig& cfg);
studies::StudyOptions study_options(const RunConfig& cfg);

/// Fixed CSV number format: scientific notation with 7 significant digits.
std::string format_number(double x);

/// Writers. Each creates or truncates `path` and throws IoError on failure.
void write_convergence(const studies::ConvergenceTable& table, const std::filesystem::path& path);
void write_temporal(const studies::TemporalTable& table, const std::filesystem::path& path);
void write_residual(const studies::ResidualHistory& history, const std::filesystem::path& path);
void write_comparison(const std::vector<studies::ComparisonRow>& rows,
                      const std::filesystem::path& path);
void write_stability(const studies::StabilitySweep& sweep, std::optional<double> courant_ratio,
                     const std::filesystem::path& path);
/// Long format: x,t,<first>,<second>.
void write_probes(const std::vector<studies::ProbeTrace>& probes,
                  std::pair<std::string_view, std::string_view> names,
                  const std::filesystem::path& path);
/// Two-column x,value text preceded by a `# field=... t=...` header line.
void write_snapshot(const fem::NodalField& field, std::string_view name, double t,
                    const std::filesystem::path& path);
void write_manifest(const RunConfig& cfg, std::string_view status,
                    const std::filesystem::path& path);

struct RunOutcome
{
    bool completed = true;
    std::string status = "completed"; // or "blew_up t=..."
    std::vector<std::filesystem::path> files;
};

/// Runs the configured command and writes its outputs (plus manifest.txt) into cfg.out.
RunOutcome run(const RunConfig& cfg);

/// Process entry point shared by the executable: parses argv, runs, reports. Returns the
/// exit code (0 completed, 1 blow-up during a run that must complete, 2 invalid input,
/// 3 I/O failure, 4 any other failure). Failures print one line
/// `error kind=<Kind> [key=<key>] message="..."` to `err`.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace swcbc::cli
