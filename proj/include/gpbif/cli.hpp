#pragma once

// Run configuration and the three command drivers behind the `gpbif` tool.
// Exit codes: 0 ok, 1 verification contract failed, 2 resonant case,
// 3 numerical failure, 4 malformed input file.

#include "gpbif/continuation.hpp"
#include "gpbif/errors.hpp"
#include "gpbif/galerkin.hpp"
#include "gpbif/io.hpp"
#include "gpbif/verifier.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gpbif {

enum ExitCode : int {
    exit_ok = 0,
    exit_contract_failed = 1,
    exit_resonant = 2,
    exit_numerical = 3,
    exit_format = 4,
};

struct RunConfig {
    std::string mode = "trace"; // spectrum | trace | verify
    std::string kind = "vortex";
    int m0 = 1;
    int n0 = 0;
    int n_radial = 28;
    int m_harmonics = 4;
    ContinuationConfig continuation{};
    // spectrum
    int m_max = 6;
    int n_max = 6;
    // verify
    std::string branch_file;
    int verify_point = -1; // < 0: record whose amplitude is closest to 0.5
    double dt = 1e-3;
    double T = 5.0;
    int grid_n = 256;
    int fine_factor = 64;
    std::string out_dir = ".";
    int seed = 0; // no randomness anywhere; kept for format stability

    SubspaceSpec subspace() const {
        SubspaceSpec spec;
        spec.kind = parse_kind(kind);
        spec.m0 = m0;
        spec.n_radial = n_radial;
        spec.m_harmonics = spec.kind == SubspaceKind::Vortex ? 1 : m_harmonics;
        spec.validate();
        return spec;
    }

    void validate() const {
        if (mode != "spectrum" && mode != "trace" && mode != "verify") throw std::invalid_argument("mode must be spectrum, trace or verify");
        if (mode == "trace") {
            subspace();
            if (n0 < 0 || n0 >= n_radial) throw std::invalid_argument("n0 must lie in [0, n_radial)");
            continuation.validate();
        }
        if (mode == "verify") {
            if (branch_file.empty()) throw std::invalid_argument("verify needs --branch-file");
            if (fine_factor < 2) throw std::invalid_argument("fine factor must be at least 2");
        }
        if (seed != 0) throw std::invalid_argument("seed must be 0: the pipeline is deterministic");
    }
};

inline std::string branch_stem(SubspaceSpec const& spec, int const n0) {
    return "branch_" + to_string(spec.kind) + "_" + std::to_string(spec.m0) + "_" + std::to_string(n0);
}

inline int cmd_spectrum(RunConfig const& config, std::ostream& log) {
    std::filesystem::create_directories(config.out_dir);
    auto const path = std::filesystem::path(config.out_dir) / "spectrum.csv";
    std::ofstream out(path, std::ios::binary);
    write_spectrum(out, config.m_max, config.n_max);
    log << "wrote " << path.string() << '\n';
    return exit_ok;
}

inline void save_branch(Branch const& branch, std::filesystem::path const& dir, std::ostream& log) {
    auto const stem = branch_stem(branch.spec, branch.n0);
    {
        std::ofstream out(dir / (stem + ".csv"), std::ios::binary);
        write_branch(out, branch);
    }
    {
        std::ofstream out(dir / (stem + ".svg"), std::ios::binary);
        write_svg(out, {branch});
    }
    log << "wrote " << (dir / (stem + ".csv")).string() << " (" << branch.points.size() << " points, " << to_string(branch.termination)
        << ")\n";
}

inline int cmd_trace(RunConfig const& config, std::ostream& log) {
    auto const spec = config.subspace();
    try {
        bifurcation_point(spec.kind, spec.m0, config.n0);
    } catch (ResonantCase const& e) {
        log << "resonant case: " << e.what() << '\n';
        for (auto const& clash : e.clashes()) log << "  clash (" << clash.m << "," << clash.n << ")\n";
        return exit_resonant;
    }
    std::filesystem::create_directories(config.out_dir);
    GalerkinSystem const system(spec);
    BranchPoint seed;
    try {
        seed = seed_branch(system, config.n0, config.continuation);
    } catch (NonConvergence const& e) {
        log << "seed failed: " << e.what() << '\n';
        return exit_numerical;
    } catch (SingularJacobian const& e) {
        log << "seed failed: " << e.what() << '\n';
        return exit_numerical;
    }
    auto const branch = continue_branch(system, config.n0, seed, config.continuation);
    save_branch(branch, config.out_dir, log);
    return branch.termination == Termination::StepFailure ? exit_numerical : exit_ok;
}

struct VerifyReport {
    std::size_t point_index = 0;
    double omega = 0.0;
    double amplitude = 0.0;
    double galerkin_residual = 0.0;
    double strong_residual = 0.0;
    double strong_residual_coarse = 0.0;
    std::vector<double> nodal_angles;
    bool nodal_checked = false;
    bool nodal_ok = true;
    double periodicity = 0.0;
    double mass_drift = 0.0;
    double energy_drift = 0.0;
    bool galerkin_ok = true;
    bool strong_ok = true;
    bool periodicity_ok = true;
    bool mass_ok = true;

    bool passed() const { return galerkin_ok && strong_ok && nodal_ok && periodicity_ok && mass_ok; }
};

inline std::size_t select_point(Branch const& branch, int const requested) {
    if (branch.points.empty()) throw FormatError("branch file has no records");
    if (requested >= 0) {
        if (static_cast<std::size_t>(requested) >= branch.points.size()) throw std::out_of_range("verify point index out of range");
        return static_cast<std::size_t>(requested);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < branch.points.size(); ++i) {
        if (std::abs(std::abs(branch.points[i].amplitude) - 0.5) < std::abs(std::abs(branch.points[best].amplitude) - 0.5)) best = i;
    }
    return best;
}

/// Contracts: Galerkin residual <= 1e-10 max(1, ||c||), strong residual <= 1e-5,
/// periodicity error <= 1e-4, mass drift <= 1e-8, and for multipole(m0, 0)
/// nodal rays at (k + 1/2) pi / m0 within one angular cell.
inline VerifyReport verify_point(Branch const& branch, std::size_t const index, RunConfig const& config, EvolutionReport* evolution = nullptr) {
    auto const& spec = branch.spec;
    auto const& point = branch.points.at(index);
    VerifyReport report;
    report.point_index = index;
    report.omega = point.omega;
    report.amplitude = point.amplitude;
    bool const trivial = point.c.size() == 0 || point.c.cwiseAbs().maxCoeff() == 0.0;

    GalerkinSystem const system(spec);
    report.galerkin_residual = system.residual(point.c, point.omega).norm();
    report.galerkin_ok = report.galerkin_residual <= scaled_residual_bound(point.c);

    if (!trivial) {
        report.strong_residual = strong_residual(spec, point, config.fine_factor);
        report.strong_residual_coarse = strong_residual(spec, point, std::max(2, config.fine_factor / 2));
    }
    report.strong_ok = report.strong_residual <= 1e-5;

    if (spec.kind == SubspaceKind::MultiPole && branch.n0 == 0 && !trivial) {
        NodalOptions const options{};
        report.nodal_checked = true;
        report.nodal_angles = nodal_lines(spec, point, options);
        double const cell = 2.0 * std::numbers::pi / options.n_theta;
        report.nodal_ok = report.nodal_angles.size() == static_cast<std::size_t>(2 * spec.m0);
        for (std::size_t k = 0; report.nodal_ok && k < report.nodal_angles.size(); ++k) {
            double const expected = (static_cast<double>(k) + 0.5) * std::numbers::pi / spec.m0;
            report.nodal_ok = std::abs(report.nodal_angles[k] - expected) <= cell;
        }
    }

    auto const check = periodicity_error(spec, point, config.T, config.dt, config.grid_n);
    report.periodicity = check.error;
    report.mass_drift = check.report.mass_drift;
    report.energy_drift = check.report.energy_drift;
    report.periodicity_ok = report.periodicity <= 1e-4;
    report.mass_ok = report.mass_drift <= 1e-8;
    if (evolution) *evolution = check.report;
    return report;
}

inline void write_verify_report(std::ostream& out, VerifyReport const& r, int const fine_factor) {
    auto flag = [](bool const ok) { return ok ? "true" : "false"; };
    out << "# gpbif verify report\n";
    out << "point_index=" << r.point_index << '\n';
    out << "omega=" << format_real(r.omega) << '\n';
    out << "amplitude=" << format_real(r.amplitude) << '\n';
    out << "galerkin_residual=" << format_real(r.galerkin_residual) << '\n';
    out << "galerkin_residual_ok=" << flag(r.galerkin_ok) << '\n';
    out << "fine_factor=" << fine_factor << '\n';
    out << "strong_residual=" << format_real(r.strong_residual) << '\n';
    out << "strong_residual_half_factor=" << format_real(r.strong_residual_coarse) << '\n';
    out << "strong_residual_ok=" << flag(r.strong_ok) << '\n';
    out << "nodal_angles=";
    for (std::size_t i = 0; i < r.nodal_angles.size(); ++i) out << (i ? ";" : "") << format_real(r.nodal_angles[i]);
    out << '\n';
    out << "nodal_ok=" << (r.nodal_checked ? flag(r.nodal_ok) : "n/a") << '\n';
    out << "periodicity_error=" << format_real(r.periodicity) << '\n';
    out << "periodicity_ok=" << flag(r.periodicity_ok) << '\n';
    out << "mass_drift=" << format_real(r.mass_drift) << '\n';
    out << "mass_ok=" << flag(r.mass_ok) << '\n';
    out << "energy_drift=" << format_real(r.energy_drift) << '\n';
    out << "status=" << (r.passed() ? "PASS" : "FAIL") << '\n';
}

inline int cmd_verify(RunConfig const& config, std::ostream& log) {
    Branch branch;
    {
        std::ifstream in(config.branch_file, std::ios::binary);
        if (!in) {
            log << "cannot open " << config.branch_file << '\n';
            return exit_format;
        }
        try {
            branch = read_branch(in);
        } catch (FormatError const& e) {
            log << "malformed branch file: " << e.what() << '\n';
            return exit_format;
        }
    }
    std::size_t index = 0;
    try {
        index = select_point(branch, config.verify_point);
    } catch (std::exception const& e) {
        log << "cannot select point: " << e.what() << '\n';
        return exit_format;
    }

    EvolutionReport evolution;
    VerifyReport report;
    try {
        report = verify_point(branch, index, config, &evolution);
    } catch (std::runtime_error const& e) {
        log << "verification failed: " << e.what() << '\n';
        return exit_numerical;
    }
    std::filesystem::create_directories(config.out_dir);
    auto const dir = std::filesystem::path(config.out_dir);
    {
        std::ofstream out(dir / "verify_report.txt", std::ios::binary);
        write_verify_report(out, report, config.fine_factor);
    }
    {
        std::ofstream out(dir / "evolution.csv", std::ios::binary);
        write_evolution(out, evolution);
    }
    write_verify_report(log, report, config.fine_factor);
    return report.passed() ? exit_ok : exit_contract_failed;
}

inline int run(RunConfig const& config, std::ostream& log) {
    config.validate();
    if (config.mode == "spectrum") return cmd_spectrum(config, log);
    if (config.mode == "trace") return cmd_trace(config, log);
    return cmd_verify(config, log);
}

} // namespace gpbif
