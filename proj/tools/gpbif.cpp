// gpbif: spectrum tables, branch tracing and branch-point verification.
//
//   gpbif --mode spectrum --m-max 6 --n-max 6 --out-dir out
//   gpbif --mode trace --kind multipole --m0 1 --n0 0 --out-dir out
//   gpbif --mode verify --branch-file out/branch_multipole_1_0.csv --out-dir out
//
// A flat key=value file (keys are the long flag names) can be passed with
// --config; flags given on the command line take precedence.

#include "gpbif/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    gpbif::RunConfig config;
    auto& cont = config.continuation;

    CLI::App app{"Vortex and multipole branches of the 2D Gross-Pitaevskii equation with harmonic trap"};
    app.set_config("--config", "", "flat key=value configuration file");
    app.add_option("--mode", config.mode, "spectrum | trace | verify")->check(CLI::IsMember({"spectrum", "trace", "verify"}));
    app.add_option("--kind", config.kind, "vortex | multipole")->check(CLI::IsMember({"vortex", "multipole"}));
    app.add_option("--m0", config.m0, "angular wavenumber of the bifurcating mode");
    app.add_option("--n0", config.n0, "radial quantum number of the bifurcating mode");
    app.add_option("--n-radial", config.n_radial, "radial modes retained per harmonic");
    app.add_option("--m-harmonics", config.m_harmonics, "odd harmonics retained (multipole)");
    app.add_option("--a0", cont.seed_amplitude, "seed amplitude");
    app.add_option("--step", cont.initial_step, "initial arclength step");
    app.add_option("--omega-max", cont.omega_max, "stop once omega exceeds this");
    app.add_option("--norm-max", cont.norm_max, "stop once ||c||_2 exceeds this");
    app.add_option("--max-points", cont.max_points, "branch point cap");
    app.add_option("--m-max", config.m_max, "spectrum: largest |m|");
    app.add_option("--n-max", config.n_max, "spectrum: largest n");
    app.add_option("--branch-file", config.branch_file, "verify: branch file to read");
    app.add_option("--verify-point", config.verify_point, "verify: record index (negative: amplitude closest to 0.5)");
    app.add_option("--dt", config.dt, "verify: time step");
    app.add_option("--T", config.T, "verify: evolution time");
    app.add_option("--grid-n", config.grid_n, "verify: Cartesian grid size (power of two)");
    app.add_option("--fine-factor", config.fine_factor, "verify: radial refinement factor for the strong residual");
    app.add_option("--out-dir", config.out_dir, "output directory");
    app.add_option("--seed", config.seed, "fixed at 0; no randomness is used");

    CLI11_PARSE(app, argc, argv);

    try {
        return gpbif::run(config, std::cout);
    } catch (std::invalid_argument const& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 1;
    } catch (gpbif::FormatError const& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return gpbif::exit_format;
    } catch (std::runtime_error const& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return gpbif::exit_numerical;
    }
}
