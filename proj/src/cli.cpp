#include "swcbc/cli.hpp"

#include "swcbc/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace swcbc::cli {

namespace fs = std::filesystem;
using schemes::Variant;

namespace {

// ---- enum spellings ----

template <class E>
struct Spelling
{
    E value;
    std::string_view text;
};

template <class E, std::size_t K>
E parse_enum(const Spelling<E> (&table)[K], std::string_view s, const std::string& key)
{
    for (const auto& e : table) {
        if (e.text == s) {
            return e.value;
        }
    }
    std::string options;
    for (const auto& e : table) {
        options += (options.empty() ? "" : ", ") + std::string(e.text);
    }
    throw ValidationError(key, "'" + std::string(s) + "' is not one of " + options);
}

template <class E, std::size_t K>
std::string_view enum_text(const Spelling<E> (&table)[K], E v)
{
    for (const auto& e : table) {
        if (e.value == v) {
            return e.text;
        }
    }
    return "?";
}

constexpr Spelling<Command> kCommands[] = {
    {Command::Convergence, "convergence"}, {Command::TemporalOrder, "temporal-order"},
    {Command::Evolve, "evolve"},           {Command::Absorption, "absorption"},
    {Command::Stability, "stability"},     {Command::Compare, "compare"},
    {Command::Reflect, "reflect"},
};

constexpr Spelling<InitialShape> kShapes[] = {
    {InitialShape::Gaussian, "gaussian"},
    {InitialShape::Uniform, "uniform"},
    {InitialShape::HalfSine, "half-sine"},
};

constexpr Spelling<studies::Reconstruction> kReconstructions[] = {
    {studies::Reconstruction::Pointwise, "pointwise"},
    {studies::Reconstruction::Nodal, "nodal"},
    {studies::Reconstruction::Invariants, "invariants"},
};

constexpr Spelling<timeint::Rk4Form> kForms[] = {
    {timeint::Rk4Form::Classical, "classical"},
    {timeint::Rk4Form::AsPrinted, "as-printed"},
};

constexpr Spelling<timeint::ClosureTiming> kClosures[] = {
    {timeint::ClosureTiming::Stage, "stage"},
    {timeint::ClosureTiming::Step, "step"},
};

// ---- scalar and list codecs ----

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// Thrown by the codecs; the parser turns it into a ParseError with location.
struct BadValue
{
    std::string what;
};

double to_double(std::string_view s)
{
    s = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
        throw BadValue{"'" + std::string(s) + "' is not a finite number"};
    }
    return v;
}

int to_int(std::string_view s)
{
    s = trim(s);
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
        throw BadValue{"'" + std::string(s) + "' is not an integer"};
    }
    return v;
}

bool to_bool(std::string_view s)
{
    s = trim(s);
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw BadValue{"'" + std::string(s) + "' is not a boolean"};
}

template <class T, class F>
std::vector<T> to_list(std::string_view s, F item)
{
    std::vector<T> out;
    s = trim(s);
    if (s.empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(item(s.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

// Shortest text that reads back to the same double.
std::string exact(double x)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F item)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + item(v[i]);
    }
    return out;
}

std::string int_text(int v) { return std::to_string(v); }

// ---- key table ----

struct Key
{
    std::string name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

#define SWCBC_DOUBLE_KEY(field)                                                            \
    Key{#field, [](RunConfig& c, std::string_view v) { c.field = to_double(v); },          \
        [](const RunConfig& c) -> std::optional<std::string> { return exact(c.field); }}
#define SWCBC_DOUBLE_LIST_KEY(field)                                                       \
    Key{#field,                                                                            \
        [](RunConfig& c, std::string_view v) { c.field = to_list<double>(v, to_double); }, \
        [](const RunConfig& c) -> std::optional<std::string> { return join(c.field, exact); }}

const std::vector<Key>& key_table()
{
    static const std::vector<Key> keys = {
        Key{"command", [](RunConfig& c, std::string_view v) { c.command = parse_command(trim(v)); },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(to_string(c.command));
            }},
        Key{"variant",
            [](RunConfig& c, std::string_view v) {
                try {
                    c.variant = schemes::parse_variant(trim(v));
                } catch (const Error& e) {
                    throw ValidationError("variant", e.what());
                }
            },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(schemes::to_string(c.variant));
            }},
        Key{"bc_mode",
            [](RunConfig& c, std::string_view v) {
                try {
                    c.bc_mode = schemes::parse_bc_mode(trim(v));
                } catch (const Error& e) {
                    throw ValidationError("bc_mode", e.what());
                }
            },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(schemes::to_string(c.bc_mode));
            }},
        Key{"coupling",
            [](RunConfig& c, std::string_view v) {
                try {
                    c.coupling = schemes::parse_coupling(trim(v));
                } catch (const Error& e) {
                    throw ValidationError("coupling", e.what());
                }
            },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(schemes::to_string(c.coupling));
            }},
        SWCBC_DOUBLE_KEY(eta0),
        SWCBC_DOUBLE_KEY(u0),
        SWCBC_DOUBLE_KEY(g),
        SWCBC_DOUBLE_KEY(H),
        SWCBC_DOUBLE_KEY(L),
        SWCBC_DOUBLE_KEY(h0),
        SWCBC_DOUBLE_KEY(impulse_amplitude),
        Key{"case", [](RunConfig& c, std::string_view v) { c.case_name = std::string(trim(v)); },
            [](const RunConfig& c) -> std::optional<std::string> { return c.case_name; }},
        Key{"Ns", [](RunConfig& c, std::string_view v) { c.Ns = to_list<int>(v, to_int); },
            [](const RunConfig& c) -> std::optional<std::string> { return join(c.Ns, int_text); }},
        SWCBC_DOUBLE_LIST_KEY(k_divs),
        SWCBC_DOUBLE_KEY(k_ref_div),
        Key{"reconstruction",
            [](RunConfig& c, std::string_view v) {
                c.reconstruction = parse_enum(kReconstructions, trim(v), "reconstruction");
            },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(enum_text(kReconstructions, c.reconstruction));
            }},
        Key{"N", [](RunConfig& c, std::string_view v) { c.N = to_int(v); },
            [](const RunConfig& c) -> std::optional<std::string> { return int_text(c.N); }},
        SWCBC_DOUBLE_KEY(k_div),
        SWCBC_DOUBLE_KEY(T),
        Key{"rk4_form",
            [](RunConfig& c, std::string_view v) {
                c.rk4_form = parse_enum(kForms, trim(v), "rk4_form");
            },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(enum_text(kForms, c.rk4_form));
            }},
        Key{"closure",
            [](RunConfig& c, std::string_view v) {
                c.closure = parse_enum(kClosures, trim(v), "closure");
            },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(enum_text(kClosures, c.closure));
            }},
        Key{"initial",
            [](RunConfig& c, std::string_view v) { c.initial = parse_initial_shape(trim(v)); },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(to_string(c.initial));
            }},
        SWCBC_DOUBLE_KEY(base1),
        SWCBC_DOUBLE_KEY(amp1),
        SWCBC_DOUBLE_KEY(base2),
        SWCBC_DOUBLE_KEY(amp2),
        SWCBC_DOUBLE_KEY(width),
        SWCBC_DOUBLE_KEY(center),
        SWCBC_DOUBLE_KEY(half_width),
        SWCBC_DOUBLE_KEY(sample_period),
        Key{"energy", [](RunConfig& c, std::string_view v) { c.energy = to_bool(v); },
            [](const RunConfig& c) -> std::optional<std::string> {
                return std::string(c.energy ? "true" : "false");
            }},
        SWCBC_DOUBLE_LIST_KEY(sample_times),
        SWCBC_DOUBLE_LIST_KEY(snapshot_times),
        SWCBC_DOUBLE_LIST_KEY(probes),
        SWCBC_DOUBLE_KEY(probe_period),
        SWCBC_DOUBLE_LIST_KEY(ratios),
        SWCBC_DOUBLE_KEY(residual_bound),
        SWCBC_DOUBLE_KEY(error_bound),
        Key{"courant_ratio",
            [](RunConfig& c, std::string_view v) { c.courant_ratio = to_double(v); },
            [](const RunConfig& c) -> std::optional<std::string> {
                if (!c.courant_ratio) {
                    return std::nullopt;
                }
                return exact(*c.courant_ratio);
            }},
        Key{"out", [](RunConfig& c, std::string_view v) { c.out = std::string(trim(v)); },
            [](const RunConfig& c) -> std::optional<std::string> { return c.out; }},
        Key{"jobs", [](RunConfig& c, std::string_view v) { c.jobs = to_int(v); },
            [](const RunConfig& c) -> std::optional<std::string> { return int_text(c.jobs); }},
    };
    return keys;
}

#undef SWCBC_DOUBLE_KEY
#undef SWCBC_DOUBLE_LIST_KEY

const Key* find_key(std::string_view name)
{
    for (const auto& k : key_table()) {
        if (k.name == name) {
            return &k;
        }
    }
    return nullptr;
}

struct Entry
{
    std::string value;
    std::string where; // "line 3" or "override 1"
};

bool is_dimensional(Variant v) { return v == Variant::Dimensional; }
bool is_supercritical(Variant v)
{
    return v == Variant::SupercriticalDirect || v == Variant::SupercriticalHomogenized;
}

// Applies one entry, converting codec failures into a located ParseError.
void apply(RunConfig& cfg, const std::string& key, const Entry& e)
{
    try {
        find_key(key)->set(cfg, e.value);
    } catch (const BadValue& b) {
        throw ParseError(e.where + ": key '" + key + "': " + b.what);
    }
}

// Defaults that depend on the variant (and command), for keys the document leaves unset.
void fill_defaults(RunConfig& cfg, const std::map<std::string, Entry>& given)
{
    auto unset = [&](const char* k) { return given.find(k) == given.end(); };
    const Variant v = cfg.variant;
    if (unset("u0")) {
        cfg.u0 = is_dimensional(v) ? 0.0 : (is_supercritical(v) ? 3.0 : 1.0);
    }
    if (unset("eta0")) {
        cfg.eta0 = is_dimensional(v) ? 0.0 : 1.0;
    }
    if (unset("initial")) {
        cfg.initial = is_dimensional(v) ? InitialShape::HalfSine : InitialShape::Gaussian;
    }
    if (unset("base1")) {
        cfg.base1 = is_dimensional(v) ? cfg.h0 : cfg.eta0;
    }
    if (unset("base2")) {
        cfg.base2 = cfg.u0;
    }
    if (unset("amp1")) {
        cfg.amp1 = is_supercritical(v) || is_dimensional(v) ? 0.05 : 0.1;
    }
    if (unset("amp2")) {
        cfg.amp2 = is_dimensional(v) ? 0.0 : (is_supercritical(v) ? 0.1 : 0.05);
    }
    if (unset("center")) {
        cfg.center = is_dimensional(v) ? 0.0 : 0.5;
    }
    if (unset("sample_times") && cfg.command == Command::Compare) {
        cfg.sample_times = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.35, 0.75, 1.05, 1.5};
    }
}

bool on_grid(double span, double k)
{
    const double ratio = span / k;
    return std::abs(std::round(ratio) - ratio) <= 1e-6 * std::max(1.0, ratio);
}

std::string escaped_quote(std::string_view s)
{
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') {
            out += '\\';
        }
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return f;
}

void finish(std::ofstream& f, const fs::path& path)
{
    f.flush();
    if (!f) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

std::string optional_number(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string();
}

std::pair<std::string_view, std::string_view> field_names(Variant v)
{
    return is_dimensional(v) ? std::pair<std::string_view, std::string_view>{"h", "u"}
                             : std::pair<std::string_view, std::string_view>{"eta", "u"};
}

std::string time_tag(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

void write_record(const studies::TrajectoryRecord& rec, Variant v, const fs::path& dir,
                  const std::string& prefix, RunOutcome& outcome)
{
    const auto names = field_names(v);
    if (!rec.probes.empty()) {
        const auto p = dir / (prefix + "probes.csv");
        write_probes(rec.probes, names, p);
        outcome.files.push_back(p);
    }
    for (const auto& snap : rec.snapshots) {
        for (int c = 0; c < 2; ++c) {
            const auto name = c == 0 ? names.first : names.second;
            const auto p = dir / (prefix + "snapshot_" + std::string(name) + "_t" +
                                  time_tag(snap.t) + ".dat");
            write_snapshot(c == 0 ? snap.state.first : snap.state.second, name, snap.t, p);
            outcome.files.push_back(p);
        }
    }
}

std::vector<double> snapshot_times_or_final(const RunConfig& cfg)
{
    return cfg.snapshot_times.empty() ? std::vector<double>{cfg.T} : cfg.snapshot_times;
}

} // namespace

std::string_view to_string(Command c) { return enum_text(kCommands, c); }
Command parse_command(std::string_view s) { return parse_enum(kCommands, s, "command"); }
std::string_view to_string(InitialShape s) { return enum_text(kShapes, s); }
InitialShape parse_initial_shape(std::string_view s) { return parse_enum(kShapes, s, "initial"); }

std::vector<std::string> case_names()
{
    auto names = studies::mms_case_names();
    names.push_back("supercritical_homogenized");
    return names;
}

studies::ManufacturedCase load_case(std::string_view name)
{
    if (name == "supercritical_homogenized") {
        return studies::homogenized(studies::mms_catalog("supercritical"));
    }
    return studies::mms_catalog(name);
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& k : key_table()) {
            n.push_back(k.name);
        }
        return n;
    }();
    return names;
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides)
{
    std::map<std::string, Entry> given;
    auto split = [](std::string_view line, const std::string& where) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(where + ": expected 'key = value'");
        }
        const auto key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) {
            throw ParseError(where + ": empty key");
        }
        if (find_key(key) == nullptr) {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
        return std::pair{key, std::string(trim(line.substr(eq + 1)))};
    };

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto where = "line " + std::to_string(line_no);
        auto [key, value] = split(line, where);
        if (given.count(key)) {
            throw ParseError(where + ": key '" + key + "' repeats " + given[key].where);
        }
        given[key] = Entry{value, where};
    }
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        const auto where = "override " + std::to_string(i + 1);
        auto [key, value] = split(overrides[i], where);
        given[key] = Entry{value, where};
    }

    RunConfig cfg;
    // Keys other defaults depend on go first.
    for (const char* k : {"command", "case", "variant", "h0"}) {
        if (auto it = given.find(k); it != given.end()) {
            apply(cfg, k, it->second);
        }
    }
    if (given.find("variant") == given.end() && !cfg.case_name.empty()) {
        if (const auto names = case_names();
            std::find(names.begin(), names.end(), cfg.case_name) != names.end()) {
            cfg.variant = load_case(cfg.case_name).cfg.variant;
        }
    }
    for (const char* k : {"eta0", "u0"}) {
        if (auto it = given.find(k); it != given.end()) {
            apply(cfg, k, it->second);
        }
    }
    fill_defaults(cfg, given);
    for (const auto& [key, entry] : given) {
        apply(cfg, key, entry);
    }
    validate(cfg);
    return cfg;
}

void validate(const RunConfig& c)
{
    auto require = [](bool ok, const char* key, const std::string& what) {
        if (!ok) {
            throw ValidationError(key, what);
        }
    };
    auto positive = [&](double v, const char* key) { require(v > 0.0, key, "must be positive"); };
    auto all_positive = [&](const std::vector<double>& v, const char* key) {
        require(!v.empty(), key, "must not be empty");
        for (double x : v) {
            positive(x, key);
        }
    };

    require(c.N >= 2, "N", "the mesh needs at least 2 elements");
    positive(c.k_div, "k_div");
    positive(c.T, "T");
    positive(c.k_ref_div, "k_ref_div");
    positive(c.sample_period, "sample_period");
    positive(c.probe_period, "probe_period");
    positive(c.residual_bound, "residual_bound");
    positive(c.error_bound, "error_bound");
    positive(c.width, "width");
    positive(c.half_width, "half_width");
    require(c.jobs >= 1, "jobs", "must be at least 1");
    require(!c.out.empty(), "out", "an output directory is required");
    if (c.courant_ratio) {
        positive(*c.courant_ratio, "courant_ratio");
    }

    if (is_dimensional(c.variant)) {
        positive(c.g, "g");
        positive(c.H, "H");
        positive(c.L, "L");
        positive(c.h0, "h0");
        require(c.half_width < c.L, "half_width", "the pulse must fit inside [-L, L]");
        positive(c.base1, "base1");
    } else {
        require(1.0 + c.eta0 > 0.0, "eta0", "1 + eta0 must be positive");
        const auto p = schemes::PhysicalParams::nondimensional(c.eta0, c.u0);
        if (is_supercritical(c.variant)) {
            require(p.is_supercritical(), "u0", "the supercritical schemes need u0 > sqrt(1 + eta0)");
        } else {
            require(p.is_subcritical(), "u0", "the subcritical schemes need |u0| < sqrt(1 + eta0)");
        }
        require(1.0 + c.base1 - std::abs(c.amp1) > 0.0, "amp1", "the initial depth 1 + eta must stay positive");
    }

    if (!c.case_name.empty()) {
        const auto names = case_names();
        require(std::find(names.begin(), names.end(), c.case_name) != names.end(), "case",
                "unknown manufactured case '" + c.case_name + "'");
    }

    const double length = is_dimensional(c.variant) ? 2.0 * c.L : 1.0;
    const double h = length / c.N;
    const double k = h / c.k_div;
    auto inside = [&](const std::vector<double>& xs, const char* key) {
        const double a = is_dimensional(c.variant) ? -c.L : 0.0;
        for (double x : xs) {
            require(x >= a && x <= a + length, key, "position outside the domain");
        }
    };
    // Compare runs to its last sample time, so T does not bound it.
    auto times_on_grid = [&](const std::vector<double>& ts, const char* key, bool bounded) {
        for (double t : ts) {
            require(t >= 0.0 && (!bounded || t <= c.T * (1.0 + 1e-12)), key,
                    "time outside [0, T]");
            require(on_grid(t, k), key, "time " + exact(t) + " is not a multiple of k");
        }
    };

    switch (c.command) {
    case Command::Convergence: {
        require(!c.case_name.empty(), "case", "convergence needs a manufactured case");
        require(!c.Ns.empty(), "Ns", "must not be empty");
        for (std::size_t i = 0; i < c.Ns.size(); ++i) {
            require(c.Ns[i] >= 2, "Ns", "every mesh needs at least 2 elements");
            require(i == 0 || c.Ns[i] > c.Ns[i - 1], "Ns", "must be strictly increasing");
        }
        break;
    }
    case Command::TemporalOrder:
        require(!c.case_name.empty(), "case", "temporal-order needs a manufactured case");
        all_positive(c.k_divs, "k_divs");
        break;
    case Command::Stability:
        all_positive(c.ratios, "ratios");
        break;
    case Command::Compare:
        require(c.variant == Variant::SubcriticalDirect || c.variant == Variant::SubcriticalDiagonal,
                "variant", "compare runs the subcritical schemes");
        require(!c.sample_times.empty(), "sample_times", "must not be empty");
        times_on_grid(c.sample_times, "sample_times", false);
        break;
    case Command::Reflect:
        require(c.variant == Variant::SubcriticalDirect || is_dimensional(c.variant), "variant",
                "reflection needs a variant with both closures (subcritical-direct, dimensional)");
        [[fallthrough]];
    case Command::Evolve:
    case Command::Absorption:
        try {
            (void)timeint::TimeGrid::make(0.0, c.T, k);
        } catch (const ConfigError& e) {
            throw ValidationError("k_div", e.what());
        }
        times_on_grid(c.snapshot_times, "snapshot_times", true);
        inside(c.probes, "probes");
        if (c.command == Command::Absorption) {
            require(on_grid(c.sample_period, k), "sample_period", "must be a multiple of k");
        }
        if (!c.probes.empty()) {
            require(on_grid(c.probe_period, k), "probe_period", "must be a multiple of k");
        }
        break;
    }
}

std::string serialize(const RunConfig& cfg)
{
    std::string out;
    for (const auto& k : key_table()) {
        if (auto v = k.get(cfg)) {
            out += k.name + " = " + *v + "\n";
        }
    }
    return out;
}

schemes::SchemeConfig scheme_config(const RunConfig& cfg)
{
    schemes::SchemeConfig s;
    s.variant = cfg.variant;
    s.bc_mode = cfg.bc_mode;
    s.coupling = cfg.coupling;
    s.params = is_dimensional(cfg.variant)
                   ? schemes::PhysicalParams::dimensional(cfg.g, cfg.H, cfg.L, cfg.h0, cfg.u0)
                   : schemes::PhysicalParams::nondimensional(cfg.eta0, cfg.u0);
    if (is_dimensional(cfg.variant) && cfg.impulse_amplitude != 0.0) {
        s.momentum_impulse = studies::impulse_forcing(cfg.impulse_amplitude);
    }
    return s;
}

fem::UniformMesh run_mesh(const RunConfig& cfg)
{
    return is_dimensional(cfg.variant) ? fem::UniformMesh(-cfg.L, cfg.L, cfg.N)
                                       : fem::UniformMesh(0.0, 1.0, cfg.N);
}

double time_step(const RunConfig& cfg) { return run_mesh(cfg).h() / cfg.k_div; }

studies::InitialData initial_data(const RunConfig& cfg)
{
    switch (cfg.initial) {
    case InitialShape::Gaussian:
        return studies::gaussian_pulse(cfg.base1, cfg.amp1, cfg.base2, cfg.amp2, cfg.width,
                                       cfg.center);
    case InitialShape::Uniform:
        return studies::uniform_state(cfg.base1, cfg.base2);
    case InitialShape::HalfSine:
        return studies::half_sine_pulse(cfg.base1, cfg.amp1, cfg.half_width);
    }
    throw ConfigError("unknown initial shape");
}

studies::StudyOptions study_options(const RunConfig& cfg)
{
    studies::StudyOptions o;
    o.integrate.closure = cfg.closure;
    o.integrate.form = cfg.rk4_form;
    o.reconstruction = cfg.reconstruction;
    o.jobs = cfg.jobs;
    return o;
}

std::string format_number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

void write_convergence(const studies::ConvergenceTable& table, const fs::path& path)
{
    auto f = open_out(path);
    f << "N,err1,order1,err2,order2\n";
    for (const auto& r : table.rows) {
        f << r.N << ',' << format_number(r.error_first) << ',' << optional_number(r.order_first)
          << ',' << format_number(r.error_second) << ',' << optional_number(r.order_second)
          << '\n';
    }
    finish(f, path);
}

void write_temporal(const studies::TemporalTable& table, const fs::path& path)
{
    auto f = open_out(path);
    f << "k_div,k,e_star,order,e_exact\n";
    for (const auto& r : table.rows) {
        f << format_number(r.k_div) << ',' << format_number(r.k) << ','
          << format_number(r.e_star) << ',' << optional_number(r.order) << ','
          << format_number(r.e_exact) << '\n';
    }
    finish(f, path);
}

void write_residual(const studies::ResidualHistory& history, const fs::path& path)
{
    const bool energy = !history.samples.empty() && history.samples.front().energy.has_value();
    auto f = open_out(path);
    f << "t,dev1,dev2,criticality" << (energy ? ",energy" : "") << '\n';
    for (const auto& s : history.samples) {
        f << format_number(s.t) << ',' << format_number(s.dev_first) << ','
          << format_number(s.dev_second) << ',' << format_number(s.criticality);
        if (energy) {
            f << ',' << optional_number(s.energy);
        }
        f << '\n';
    }
    finish(f, path);
}

void write_comparison(const std::vector<studies::ComparisonRow>& rows, const fs::path& path)
{
    auto f = open_out(path);
    f << "t,eps,e\n";
    for (const auto& r : rows) {
        f << format_number(r.t) << ',' << format_number(r.eps) << ',' << format_number(r.e)
          << '\n';
    }
    finish(f, path);
}

void write_stability(const studies::StabilitySweep& sweep, std::optional<double> courant_ratio,
                     const fs::path& path)
{
    auto f = open_out(path);
    if (courant_ratio) {
        f << "# courant_ratio=" << format_number(*courant_ratio) << '\n';
    }
    f << "ratio,k,stable,measure,blew_up_at\n";
    for (const auto& e : sweep.entries) {
        f << format_number(e.ratio) << ',' << format_number(e.k) << ',' << (e.stable ? 1 : 0)
          << ',' << (std::isfinite(e.measure) ? format_number(e.measure) : "inf") << ','
          << optional_number(e.blew_up_at) << '\n';
    }
    finish(f, path);
}

void write_probes(const std::vector<studies::ProbeTrace>& probes,
                  std::pair<std::string_view, std::string_view> names, const fs::path& path)
{
    auto f = open_out(path);
    f << "x,t," << names.first << ',' << names.second << '\n';
    for (const auto& p : probes) {
        for (std::size_t i = 0; i < p.t.size(); ++i) {
            f << format_number(p.x) << ',' << format_number(p.t[i]) << ','
              << format_number(p.first[i]) << ',' << format_number(p.second[i]) << '\n';
        }
    }
    finish(f, path);
}

void write_snapshot(const fem::NodalField& field, std::string_view name, double t,
                    const fs::path& path)
{
    auto f = open_out(path);
    f << "# field=" << name << " t=" << format_number(t) << '\n';
    for (std::size_t i = 0; i < field.size(); ++i) {
        f << format_number(field.mesh.node(i)) << ' ' << format_number(field[i]) << '\n';
    }
    finish(f, path);
}

void write_manifest(const RunConfig& cfg, std::string_view status, const fs::path& path)
{
    auto f = open_out(path);
    f << "# swcbc " << kVersion << '\n' << "# status " << status << '\n' << serialize(cfg);
    finish(f, path);
}

RunOutcome run(const RunConfig& cfg)
{
    validate(cfg);
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }

    RunOutcome outcome;
    auto mark = [&](const timeint::RunStatus& s) {
        if (!s.completed && outcome.completed) {
            outcome.completed = false;
            outcome.status = "blew_up t=" + format_number(s.blew_up_at);
        }
    };
    auto emit = [&](const std::string& name, auto&& writer) {
        const auto p = dir / name;
        writer(p);
        outcome.files.push_back(p);
    };

    const auto options = study_options(cfg);
    switch (cfg.command) {
    case Command::Convergence: {
        auto c = load_case(cfg.case_name);
        c.cfg.coupling = cfg.coupling;
        const auto table = studies::run_convergence(c, cfg.Ns, cfg.k_div, cfg.T, options);
        emit("convergence.csv", [&](const fs::path& p) { write_convergence(table, p); });
        break;
    }
    case Command::TemporalOrder: {
        auto c = load_case(cfg.case_name);
        c.cfg.coupling = cfg.coupling;
        const auto table =
            studies::run_temporal_order(c, cfg.N, cfg.k_divs, cfg.k_ref_div, cfg.T, options);
        emit("temporal.csv", [&](const fs::path& p) { write_temporal(table, p); });
        break;
    }
    case Command::Evolve: {
        const auto scfg = scheme_config(cfg);
        const auto grid = timeint::TimeGrid::make(0.0, cfg.T, time_step(cfg));
        const auto rec = studies::run_evolution(scfg, run_mesh(cfg), initial_data(cfg), grid,
                                                snapshot_times_or_final(cfg), cfg.probes,
                                                cfg.probe_period, options.integrate);
        write_record(rec, cfg.variant, dir, "", outcome);
        mark(rec.status);
        break;
    }
    case Command::Absorption: {
        const auto scfg = scheme_config(cfg);
        const auto mesh = run_mesh(cfg);
        const auto init = studies::make_initial_state(scfg, mesh, initial_data(cfg));
        const auto grid = timeint::TimeGrid::make(0.0, cfg.T, time_step(cfg));
        const auto history = studies::run_absorption(scfg, init, grid, cfg.sample_period,
                                                     cfg.energy, options.integrate);
        emit("residual.csv", [&](const fs::path& p) { write_residual(history, p); });
        mark(history.status);
        break;
    }
    case Command::Stability: {
        // Blow-up is the measurement here, never a failure of the run.
        const auto sweep =
            cfg.case_name.empty()
                ? studies::run_stability_sweep(scheme_config(cfg), run_mesh(cfg), initial_data(cfg),
                                               cfg.ratios, cfg.T, cfg.residual_bound, options)
                : studies::run_stability_sweep(load_case(cfg.case_name), cfg.N, cfg.ratios, cfg.T,
                                               cfg.error_bound, options);
        emit("stability.csv",
             [&](const fs::path& p) { write_stability(sweep, cfg.courant_ratio, p); });
        break;
    }
    case Command::Compare: {
        const auto rows = studies::compare_direct_vs_diagonal(
            scheme_config(cfg).params, run_mesh(cfg), initial_data(cfg), time_step(cfg),
            cfg.sample_times, options.integrate);
        emit("compare.csv", [&](const fs::path& p) { write_comparison(rows, p); });
        break;
    }
    case Command::Reflect: {
        auto nonlinear = scheme_config(cfg);
        nonlinear.bc_mode = schemes::BcMode::NonlinearCharacteristic;
        auto linearized = nonlinear;
        linearized.bc_mode = schemes::BcMode::LinearizedCharacteristic;
        const auto grid = timeint::TimeGrid::make(0.0, cfg.T, time_step(cfg));
        const auto r = studies::run_reflection_experiment(
            nonlinear, linearized, run_mesh(cfg), initial_data(cfg), grid, cfg.probes,
            cfg.probe_period, snapshot_times_or_final(cfg), options.integrate);
        write_record(r.nonlinear, cfg.variant, dir, "nonlinear_", outcome);
        write_record(r.linearized, cfg.variant, dir, "linearized_", outcome);
        mark(r.nonlinear.status);
        mark(r.linearized.status);
        break;
    }
    }
    emit("manifest.txt", [&](const fs::path& p) { write_manifest(cfg, outcome.status, p); });
    return outcome;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    std::string command;
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    int jobs = 0;

    CLI::App app{"Shallow-water Galerkin solver with characteristic boundary conditions"};
    app.set_version_flag("--version", std::string(kVersion));
    std::vector<std::string> commands;
    for (const auto& c : kCommands) {
        commands.emplace_back(c.text);
    }
    app.add_option("command", command, "Experiment to run")
        ->required()
        ->check(CLI::IsMember(commands));
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "Override one config key (key=value); repeatable");
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--jobs", jobs, "Parallel runs inside a study (default 1)")
        ->check(CLI::PositiveNumber);

    auto fail = [&](std::string_view kind, const std::string& key, const std::string& message) {
        err << "error kind=" << kind;
        if (!key.empty()) {
            err << " key=" << key;
        }
        err << " message=" << escaped_quote(message) << '\n';
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        fail("UsageError", "", e.what());
        return 2;
    }

    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) {
                throw IoError("cannot read '" + config_path + "'");
            }
            std::ostringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        }
        // Explicit flags go last so they win over --set.
        std::vector<std::string> overrides = sets;
        overrides.push_back("command=" + command);
        overrides.push_back("out=" + out_dir);
        if (jobs > 0) {
            overrides.push_back("jobs=" + std::to_string(jobs));
        }
        const RunConfig cfg = parse_config(text, overrides);
        const RunOutcome outcome = run(cfg);
        for (const auto& p : outcome.files) {
            out << p.string() << '\n';
        }
        if (!outcome.completed) {
            fail("BlowUp", "", outcome.status);
            return 1;
        }
        return 0;
    } catch (const ValidationError& e) {
        fail(e.kind(), e.key(), e.what());
        return 2;
    } catch (const ParseError& e) {
        fail(e.kind(), "", e.what());
        return 2;
    } catch (const IoError& e) {
        fail(e.kind(), "", e.what());
        return 3;
    } catch (const Error& e) {
        fail(e.kind(), "", e.what());
        return 4;
    } catch (const std::exception& e) {
        fail("InternalError", "", e.what());
        return 4;
    }
}

} // namespace swcbc::cli
