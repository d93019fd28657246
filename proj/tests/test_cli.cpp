#include "swcbc/cli.hpp"
#include "swcbc/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace swcbc;
using namespace swcbc::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    auto dir = fs::temp_directory_path() / "swcbc_tests" / (std::string(info->name()) + "_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int run_main(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr)
{
    args.insert(args.begin(), "swcbc");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream o, e;
    const int rc = main_entry(static_cast<int>(argv.size()), argv.data(), o, e);
    if (out) {
        *out = o.str();
    }
    if (err) {
        *err = e.str();
    }
    return rc;
}

const char* kMinimal = "case = supercritical\nNs = 40,80\nk_div = 10\nT = 1\n";

} // namespace

TEST(ParseConfig, MinimalConvergenceConfig)
{
    const auto c = parse_config(kMinimal);
    EXPECT_EQ(c.command, Command::Convergence);
    EXPECT_EQ(c.case_name, "supercritical");
    EXPECT_EQ(c.Ns, (std::vector<int>{40, 80}));
    EXPECT_EQ(c.k_div, 10.0);
    EXPECT_EQ(c.variant, schemes::Variant::SupercriticalDirect);
    EXPECT_EQ(c.u0, 3.0);
}

TEST(ParseConfig, MeshPreconditionNamesTheKey)
{
    try {
        parse_config("command = evolve\nN = 1\n");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "N");
    }
}

TEST(ParseConfig, ParseErrorsCarryTheLine)
{
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("case = supercritical\nbogus = 3\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("# comment\n\nT = abc\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("T = 1\nT = 2\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("just words\n").find("line 1"), std::string::npos);
    EXPECT_THROW(parse_config(kMinimal, {"nope=1"}), ParseError);
}

TEST(ParseConfig, OverridesWinOverTheDocument)
{
    const auto c = parse_config(kMinimal, {"T=0.5", "Ns=10,20,40"});
    EXPECT_EQ(c.T, 0.5);
    EXPECT_EQ(c.Ns.size(), 3u);
}

TEST(ParseConfig, VariantDefaults)
{
    const auto sub = parse_config("command = absorption\nvariant = subcritical-direct\nN = 100\n");
    EXPECT_EQ(sub.eta0, 1.0);
    EXPECT_EQ(sub.u0, 1.0);
    EXPECT_EQ(sub.amp1, 0.1);
    EXPECT_EQ(sub.amp2, 0.05);
    const auto dim = parse_config("command = absorption\nvariant = dimensional\nN = 100\n");
    EXPECT_EQ(dim.g, 9.8);
    EXPECT_EQ(dim.H, 0.2);
    EXPECT_EQ(dim.h0, 0.2);
    EXPECT_EQ(dim.initial, InitialShape::HalfSine);
    EXPECT_EQ(dim.base1, 0.2);
    const auto diag = parse_config("command = temporal-order\ncase = subcritical_diagonal\nN = 50\n");
    EXPECT_EQ(diag.variant, schemes::Variant::SubcriticalDiagonal);
}

TEST(ParseConfig, RejectsInconsistentValues)
{
    auto key_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ValidationError& e) {
            return e.key();
        }
        return std::string("none");
    };
    EXPECT_EQ(key_of("command = convergence\n"), "case");
    EXPECT_EQ(key_of("case = nowhere\n"), "case");
    EXPECT_EQ(key_of("case = supercritical\nNs = 80,40\n"), "Ns");
    EXPECT_EQ(key_of("command = evolve\nvariant = supercritical\nu0 = 1\n"), "u0");
    EXPECT_EQ(key_of("command = evolve\nN = 100\nk_div = 3\nT = 0.015\n"), "k_div");
    EXPECT_EQ(key_of("command = evolve\nN = 100\nsnapshot_times = 2\n"), "snapshot_times");
    EXPECT_EQ(key_of("command = reflect\nvariant = supercritical\nN = 100\n"), "variant");
    EXPECT_EQ(key_of("command = stability\nratios = 0.3,-1\n"), "ratios");
    EXPECT_EQ(key_of("command = stability\nvariant = hypersonic\n"), "variant");
    EXPECT_EQ(key_of("command = teleport\n"), "command");
}

TEST(Serialize, RoundTripProperty)
{
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const char* variants[] = {"supercritical", "supercritical-homogenized", "subcritical-direct",
                              "subcritical-diagonal", "dimensional"};
    for (int trial = 0; trial < 200; ++trial) {
        const std::string v = variants[trial % 5];
        std::vector<std::string> sets = {
            "command=stability",
            "variant=" + v,
            "N=" + std::to_string(2 + trial),
            "T=" + std::to_string(0.1 + U(rng)),
            "k_div=" + std::to_string(1.0 + 40 * U(rng)),
            "ratios=" + std::to_string(U(rng) + 0.01) + "," + std::to_string(U(rng) + 0.01),
            "width=" + std::to_string(100 + 500 * U(rng)),
            "energy=" + std::string(trial % 2 ? "true" : "false"),
            "probes=" + std::to_string(0.1 * U(rng)),
        };
        if (trial % 3 == 0) {
            sets.push_back("courant_ratio=0.3695");
        }
        if (trial % 4 == 0) {
            sets.push_back("amp1=" + std::to_string(0.1 / 3.0 * U(rng)));
        }
        const auto c = parse_config("", sets);
        const auto text = serialize(c);
        EXPECT_EQ(parse_config(text), c) << text;
        EXPECT_EQ(serialize(parse_config(text)), text);
    }
    // Values with no short decimal form survive too.
    auto c = parse_config(kMinimal);
    c.T = 0.1 + 0.2;
    c.k_divs = {1.0 / 3.0, 64.5};
    EXPECT_EQ(parse_config(serialize(c)), c);
}

TEST(Serialize, EveryKeyIsWritten)
{
    auto c = parse_config(kMinimal, {"courant_ratio=0.3695"});
    const auto text = "\n" + serialize(c);
    for (const auto& k : config_keys()) {
        EXPECT_NE(text.find("\n" + k + " = "), std::string::npos) << k;
    }
}

TEST(Emit, NumberFormat)
{
    EXPECT_EQ(format_number(1.243098e-3), "1.243098e-03");
    EXPECT_EQ(format_number(0.0), "0.000000e+00");
    EXPECT_EQ(format_number(-2.5), "-2.500000e+00");
}

TEST(Emit, SingleSampleHistoryHasOneRow)
{
    studies::ResidualHistory h;
    h.samples.push_back({0.5, 1e-6, 2e-6, -0.4, std::nullopt});
    const auto dir = fresh_dir("one");
    fs::create_directories(dir);
    write_residual(h, dir / "r.csv");
    EXPECT_EQ(slurp(dir / "r.csv"),
              "t,dev1,dev2,criticality\n5.000000e-01,1.000000e-06,2.000000e-06,-4.000000e-01\n");
}

TEST(Emit, ConvergenceColumns)
{
    studies::ConvergenceTable t;
    t.rows.push_back({40, 1.243098e-3, std::nullopt, 5.62351e-3, std::nullopt});
    t.rows.push_back({80, 3.1e-4, 2.0, 1.4e-3, 2.0});
    const auto dir = fresh_dir("conv");
    fs::create_directories(dir);
    write_convergence(t, dir / "c.csv");
    EXPECT_EQ(slurp(dir / "c.csv"),
              "N,err1,order1,err2,order2\n"
              "40,1.243098e-03,,5.623510e-03,\n"
              "80,3.100000e-04,2.000000e+00,1.400000e-03,2.000000e+00\n");
}

TEST(Emit, UnwritablePathIsAnIoError)
{
    studies::ResidualHistory h;
    EXPECT_THROW(write_residual(h, "/nonexistent-dir/x/r.csv"), IoError);
}

TEST(Run, ConvergenceCellAndByteIdenticalReruns)
{
    const auto a = fresh_dir("a");
    const auto b = fresh_dir("b");
    ASSERT_EQ(run_main({"convergence", "--set", "case=supercritical", "--set", "Ns=40,80", "--out", a.string()}), 0);
    ASSERT_EQ(run_main({"convergence", "--set", "case=supercritical", "--set", "Ns=40,80", "--out", b.string(),
                        "--jobs", "2"}),
              0);
    const auto csv = slurp(a / "convergence.csv");
    EXPECT_NE(csv.find("\n40,1.243098e-03,"), std::string::npos) << csv;
    EXPECT_EQ(csv, slurp(b / "convergence.csv"));
    const auto manifest = slurp(a / "manifest.txt");
    EXPECT_NE(manifest.find("# swcbc " + std::string(kVersion)), std::string::npos);
    // The manifest is itself a config that reproduces the run.
    auto cfg = parse_config(manifest);
    EXPECT_EQ(cfg.out, a.string());
    EXPECT_EQ(cfg.Ns, (std::vector<int>{40, 80}));
}

TEST(Run, StabilityEchoesCourantRatioAndTreatsBlowUpAsCompleted)
{
    const auto dir = fresh_dir("stab");
    std::string out;
    const int rc = run_main({"stability", "--set", "variant=supercritical", "--set", "N=100", "--set", "T=0.2",
                             "--set", "ratios=0.1,2", "--set", "courant_ratio=0.3695", "--out", dir.string()},
                            &out);
    EXPECT_EQ(rc, 0);
    const auto csv = slurp(dir / "stability.csv");
    EXPECT_EQ(csv.rfind("# courant_ratio=3.695000e-01\nratio,k,stable,measure,blew_up_at\n", 0), 0u) << csv;
    EXPECT_NE(csv.find(",0,inf,"), std::string::npos);
    EXPECT_NE(slurp(dir / "manifest.txt").find("courant_ratio = 0.3695"), std::string::npos);
}

TEST(Run, BlowUpInAnEvolutionIsAFailure)
{
    const auto dir = fresh_dir("evolve");
    std::string err;
    const int rc = run_main({"evolve", "--set", "variant=supercritical", "--set", "N=100", "--set", "k_div=1",
                             "--out", dir.string()},
                            nullptr, &err);
    EXPECT_EQ(rc, 1);
    EXPECT_EQ(err.rfind("error kind=BlowUp ", 0), 0u) << err;
}

TEST(Run, ErrorLinesAreMachineReadable)
{
    const auto dir = fresh_dir("bad");
    std::string err;
    EXPECT_EQ(run_main({"evolve", "--set", "N=1", "--out", dir.string()}, nullptr, &err), 2);
    EXPECT_EQ(err, "error kind=ValidationError key=N message=\"N: the mesh needs at least 2 elements\"\n");
    EXPECT_EQ(run_main({"evolve", "--set", "colour=blue", "--out", dir.string()}, nullptr, &err), 2);
    EXPECT_EQ(err.rfind("error kind=ParseError message=", 0), 0u) << err;
    EXPECT_EQ(run_main({"evolve"}, nullptr, &err), 2);
    EXPECT_EQ(err.rfind("error kind=UsageError", 0), 0u) << err;
    EXPECT_EQ(run_main({"fly", "--out", dir.string()}, nullptr, &err), 2);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Run, OutputsStayInsideTheOutputDirectory)
{
    const auto dir = fresh_dir("reflect");
    const auto cfg = parse_config("", {"command=reflect", "variant=subcritical-direct", "N=100", "T=0.2",
                                       "probes=0.9", "probe_period=0.1", "snapshot_times=0.1,0.2",
                                       "out=" + dir.string()});
    const auto outcome = run(cfg);
    EXPECT_TRUE(outcome.completed);
    std::size_t count = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        (void)entry;
        ++count;
    }
    EXPECT_EQ(count, outcome.files.size());
    for (const auto& p : outcome.files) {
        EXPECT_EQ(p.parent_path(), dir);
    }
    const auto snap = slurp(dir / "linearized_snapshot_eta_t0.2.dat");
    EXPECT_EQ(snap.rfind("# field=eta t=2.000000e-01\n0.000000e+00 ", 0), 0u);
}

TEST(Run, ComparisonAndAbsorptionFiles)
{
    const auto dir = fresh_dir("misc");
    auto cfg = parse_config("", {"command=compare", "variant=subcritical-direct", "N=100",
                                 "sample_times=0,0.1", "out=" + dir.string()});
    run(cfg);
    EXPECT_EQ(slurp(dir / "compare.csv").rfind("t,eps,e\n0.000000e+00,", 0), 0u);
    cfg = parse_config("", {"command=absorption", "variant=dimensional", "N=100", "T=0.2",
                            "sample_period=0.1", "energy=true", "out=" + dir.string()});
    run(cfg);
    const auto csv = slurp(dir / "residual.csv");
    EXPECT_EQ(csv.rfind("t,dev1,dev2,criticality,energy\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
