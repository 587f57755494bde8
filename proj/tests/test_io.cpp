#include "gpbif/cli.hpp"
#include "gpbif/io.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace gpbif;

namespace {

Branch short_branch(SubspaceSpec const& spec, double const norm_max = 1.5) {
    ContinuationConfig config;
    config.norm_max = norm_max;
    return trace_branch(GalerkinSystem(spec), 0, config);
}

std::string to_text(Branch const& branch) {
    std::ostringstream out;
    write_branch(out, branch);
    return out.str();
}

int run_cli(std::string const& args) {
    int const status = std::system((std::string(GPBIF_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch_dir(std::string const& name) {
    auto const dir = std::filesystem::temp_directory_path() / ("gpbif_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST(Reals, ShortestRoundTrip) {
    for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min(), -2.5e-17}) {
        double const back = parse_real(format_real(v));
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back), std::bit_cast<std::uint64_t>(v)) << format_real(v);
    }
    EXPECT_THROW(parse_real("1.0x"), FormatError);
    EXPECT_THROW(parse_real(""), FormatError);
    EXPECT_THROW(parse_int("3.5"), FormatError);
}

TEST(Spectrum, TableContents) {
    std::ostringstream out;
    write_spectrum(out, 6, 6);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# m,n,lambda,nodes,norm_error");
    int rows = 0;
    while (std::getline(in, line)) {
        auto const fields = split(line, ',');
        ASSERT_EQ(fields.size(), 5u);
        int const m = parse_int(fields[0]);
        int const n = parse_int(fields[1]);
        EXPECT_EQ(parse_int(fields[2]), 2 * (std::abs(m) + 2 * n + 1));
        EXPECT_EQ(parse_int(fields[3]), n);
        EXPECT_LT(parse_real(fields[4]), 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 13 * 7);
    EXPECT_THROW(write_spectrum(out, 21, 1), std::invalid_argument);
}

TEST(BranchFile, BitExactRoundTrip) {
    for (auto const& spec : {SubspaceSpec::vortex(1, 10), SubspaceSpec::multipole(2, 8, 3)}) {
        auto const branch = short_branch(spec);
        auto const text = to_text(branch);
        std::istringstream in(text);
        auto const back = read_branch(in);
        EXPECT_EQ(back.spec, branch.spec);
        EXPECT_EQ(back.n0, branch.n0);
        EXPECT_EQ(back.termination, branch.termination);
        EXPECT_EQ(back.omega_star, branch.omega_star);
        ASSERT_EQ(back.points.size(), branch.points.size());
        for (std::size_t i = 0; i < branch.points.size(); ++i) {
            EXPECT_EQ(back.points[i].omega, branch.points[i].omega);
            EXPECT_EQ(back.points[i].arclength, branch.points[i].arclength);
            EXPECT_EQ(back.points[i].amplitude, branch.points[i].amplitude);
            EXPECT_EQ(back.points[i].residual_norm, branch.points[i].residual_norm);
            EXPECT_TRUE(back.points[i].c == branch.points[i].c);
        }
        EXPECT_EQ(to_text(back), text);
    }
}

TEST(BranchFile, DeterministicTrace) {
    auto const spec = SubspaceSpec::multipole(1, 10, 3);
    EXPECT_EQ(to_text(short_branch(spec, 3.0)), to_text(short_branch(spec, 3.0)));
}

TEST(BranchFile, MalformedInputs) {
    auto const text = to_text(short_branch(SubspaceSpec::vortex(1, 6)));
    auto fails = [](std::string const& bad) {
        std::istringstream in(bad);
        EXPECT_THROW(read_branch(in), FormatError) << bad.substr(0, 120);
    };
    fails("");
    fails("# something else\n" + text.substr(text.find('\n') + 1));
    {
        auto bad = text;
        bad.replace(bad.find("kind=vortex"), 11, "kind=spiral");
        fails(bad);
    }
    {
        auto bad = text;
        bad.replace(bad.find(",n_radial=6"), 11, "");
        fails(bad);
    }
    {
        auto bad = text;
        bad.replace(bad.find("termination="), 12, "terminus=");
        fails(bad);
    }
    {
        auto bad = text;
        bad.insert(bad.size() - 1, ",1.0");
        fails(bad);
    }
    {
        auto bad = text;
        auto const last = bad.rfind('\n', bad.size() - 2);
        bad += bad.substr(last + 1);
        fails(bad);
    }
    {
        auto bad = text;
        auto const pos = bad.rfind(',');
        bad.replace(pos + 1, 1, "q");
        fails(bad);
    }
}

TEST(Svg, WellFormed) {
    std::vector<Branch> const branches{short_branch(SubspaceSpec::vortex(1, 8)), short_branch(SubspaceSpec::multipole(1, 8, 2))};
    std::ostringstream out;
    write_svg(out, branches);
    std::istringstream in(out.str());
    boost::property_tree::ptree tree;
    ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
    auto const& svg = tree.get_child("svg");
    int polylines = 0;
    int markers = 0;
    for (auto const& [name, child] : svg) {
        polylines += name == "polyline";
        markers += name == "circle";
    }
    EXPECT_EQ(polylines, 2);
    EXPECT_EQ(markers, 2);
}

TEST(Evolution, CsvHeader) {
    EvolutionReport report;
    report.times = {0.0, 0.1};
    report.mass = {1.0, 1.0};
    report.energy = {2.0, 2.0};
    report.periodicity = {0.0, 1e-9};
    std::ostringstream out;
    write_evolution(out, report);
    EXPECT_EQ(out.str(), "# t,mass,energy,periodicity\n0,1,2,0\n0.10000000000000001,1,2,1.0000000000000001e-09\n");
}

TEST(Commands, VerifyTrivialRecordPasses) {
    auto const dir = scratch_dir("trivial");
    Branch branch;
    branch.spec = SubspaceSpec::multipole(1, 4, 2);
    branch.omega_star = 4.0;
    branch.termination = Termination::ReachedNormMax;
    BranchPoint zero;
    zero.c = Eigen::VectorXd::Zero(8);
    zero.omega = 4.0;
    branch.points.push_back(zero);
    {
        std::ofstream out(dir / "branch.csv");
        write_branch(out, branch);
    }
    RunConfig config;
    config.mode = "verify";
    config.branch_file = (dir / "branch.csv").string();
    config.out_dir = dir.string();
    std::ostringstream log;
    EXPECT_EQ(run(config, log), exit_ok);
    EXPECT_NE(log.str().find("strong_residual=0\n"), std::string::npos);
    EXPECT_NE(log.str().find("periodicity_error=0\n"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "verify_report.txt"));
}

TEST(Commands, VerifyRejectsMalformedFile) {
    auto const dir = scratch_dir("malformed");
    {
        std::ofstream out(dir / "bad.csv");
        out << "# gpbif-branch v1\n# kind=vortex\n";
    }
    RunConfig config;
    config.mode = "verify";
    config.branch_file = (dir / "bad.csv").string();
    config.out_dir = dir.string();
    std::ostringstream log;
    EXPECT_EQ(run(config, log), exit_format);
    config.branch_file = (dir / "missing.csv").string();
    EXPECT_EQ(run(config, log), exit_format);
}

TEST(Commands, TraceResonantExitCode) {
    RunConfig config;
    config.kind = "multipole";
    config.m0 = 2;
    config.n0 = 2;
    config.out_dir = scratch_dir("resonant").string();
    std::ostringstream log;
    EXPECT_EQ(run(config, log), exit_resonant);
    EXPECT_NE(log.str().find("(6,0)"), std::string::npos);
}

TEST(Cli, SpectrumTraceVerify) {
    auto const dir = scratch_dir("cli");
    EXPECT_EQ(run_cli("--mode spectrum --m-max 2 --n-max 2 --out-dir " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "spectrum.csv"));
    EXPECT_EQ(run_cli("--mode trace --kind vortex --m0 1 --n0 0 --n-radial 12 --norm-max 2 --out-dir " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "branch_vortex_1_0.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "branch_vortex_1_0.svg"));
    EXPECT_EQ(run_cli("--mode trace --kind multipole --m0 1 --n0 1 --out-dir " + dir.string()), exit_resonant);
    {
        std::ofstream out(dir / "broken.csv");
        out << "not a branch file\n";
    }
    EXPECT_EQ(run_cli("--mode verify --branch-file " + (dir / "broken.csv").string() + " --out-dir " + dir.string()), exit_format);
}

TEST(Cli, ConfigFileWithOverride) {
    auto const dir = scratch_dir("config");
    {
        std::ofstream out(dir / "run.ini");
        out << "mode=trace\nkind=vortex\nm0=2\nn0=0\nn-radial=10\nnorm-max=1.0\nout-dir=" << dir.string() << "\n";
    }
    EXPECT_EQ(run_cli("--config " + (dir / "run.ini").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "branch_vortex_2_0.csv"));
    EXPECT_EQ(run_cli("--config " + (dir / "run.ini").string() + " --m0 3"), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "branch_vortex_3_0.csv"));
}
