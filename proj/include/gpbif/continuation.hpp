#pragma once

// Branch seeding at the oscillator eigenvalues and pseudo-arclength
// continuation in (c, omega).

#include "gpbif/errors.hpp"
#include "gpbif/galerkin.hpp"
#include "gpbif/symmetry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpbif {

struct BranchPoint {
    double omega = 0.0;
    Eigen::VectorXd c;
    double amplitude = 0.0; // coefficient of the bifurcating mode (m0, n0)
    double residual_norm = 0.0;
    double arclength = 0.0;
};

enum class Termination {
    ReachedOmegaMax,
    ReachedNormMax,
    ReturnedNearBifurcation,
    StepFailure,
    MaxPointsReached,
};

inline std::string to_string(Termination const t) {
    switch (t) {
        case Termination::ReachedOmegaMax: return "ReachedOmegaMax";
        case Termination::ReachedNormMax: return "ReachedNormMax";
        case Termination::ReturnedNearBifurcation: return "ReturnedNearBifurcation";
        case Termination::StepFailure: return "StepFailure";
        case Termination::MaxPointsReached: return "MaxPointsReached";
    }
    return "StepFailure";
}

struct Branch {
    SubspaceSpec spec;
    int n0 = 0;
    double omega_star = 0.0;
    std::vector<BranchPoint> points;
    Termination termination = Termination::StepFailure;
    double returned_omega = 0.0; // eigenvalue reached, for ReturnedNearBifurcation
};

struct ContinuationConfig {
    double seed_amplitude = 1e-2;
    double initial_step = 5e-3;
    double min_step = 1e-5;
    double max_step = 0.1;
    double grow = 2.0;
    double shrink = 0.5;
    int fast_iterations = 3; // grow the step when the corrector needs at most this many
    double omega_max = 40.0;
    double norm_max = 10.0;
    int max_points = 2000;
    int max_corrector_iterations = 10;
    NewtonOptions newton{};

    void validate() const {
        if (seed_amplitude == 0.0 || !std::isfinite(seed_amplitude)) throw std::invalid_argument("seed amplitude must be nonzero");
        if (!(initial_step > 0.0 && min_step > 0.0 && max_step > 0.0)) throw std::invalid_argument("step sizes must be positive");
        if (!(min_step <= initial_step && initial_step <= max_step)) throw std::invalid_argument("step bounds must satisfy min <= initial <= max");
        if (!(grow > 1.0) || !(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("step adaptation factors out of range");
        if (!(omega_max > 0.0) || !(norm_max > 0.0) || max_points < 2) throw std::invalid_argument("termination limits must be positive");
    }
};

/// omega* = 2(m0 + 2 n0 + 1); multipole subspaces must pass the simplicity check.
inline double bifurcation_point(SubspaceKind const kind, int const m0, int const n0) {
    if (n0 < 0) throw std::invalid_argument("n0 must be non-negative");
    if (kind == SubspaceKind::MultiPole) {
        auto const simplicity = check_simplicity(m0, n0);
        if (!simplicity.simple) {
            std::ostringstream msg;
            msg << "eigenvalue " << eigenvalue({m0, n0}) << " of (" << m0 << "," << n0 << ") is resonant with";
            for (auto const& clash : simplicity.clashes) msg << " (" << clash.m << "," << clash.n << ")";
            throw ResonantCase(msg.str(), simplicity.clashes);
        }
    } else if (m0 < 0) {
        throw std::invalid_argument("vortex m0 must be non-negative");
    }
    return eigenvalue({m0, n0});
}

inline Eigen::Index amplitude_position(SubspaceSpec const& spec, int const n0) {
    if (n0 < 0 || n0 >= spec.n_radial) throw std::invalid_argument("n0 outside the radial truncation");
    return n0; // (m0, n0) is in the first harmonic block in both layouts
}

inline double scaled_residual_bound(Eigen::VectorXd const& c) { return 1e-10 * std::max(1.0, c.norm()); }

/// Newton-corrected point with c_{m0,n0} pinned to the seed amplitude.
/// Initial guess from the single-mode balance omega = omega* + a^2 N_p(e_p).
inline BranchPoint seed_branch(GalerkinSystem const& system, int const n0, ContinuationConfig const& config = {}) {
    auto const& spec = system.spec();
    double const omega_star = bifurcation_point(spec.kind, spec.m0, n0);
    if (config.seed_amplitude == 0.0) throw std::invalid_argument("seed amplitude 0 pins the trivial solution");
    Eigen::Index const p = amplitude_position(spec, n0);
    double const a = config.seed_amplitude;

    Eigen::VectorXd unit = Eigen::VectorXd::Zero(system.dimension());
    unit(p) = 1.0;
    double const onset = system.cubic_part(unit)(p);
    Eigen::VectorXd guess = a * unit;
    auto const solved = newton_solve(system, guess, omega_star + onset * a * a, Pin{p, a}, config.newton);

    BranchPoint point;
    point.omega = solved.omega;
    point.c = solved.c;
    point.amplitude = solved.c(p);
    point.residual_norm = system.residual(solved.c, solved.omega).norm();
    point.arclength = 0.0;
    return point;
}

namespace detail {

struct CorrectorResult {
    bool converged = false;
    Eigen::VectorXd x;
    int iterations = 0;
};

// Newton on {F(x) = 0, tangent . (x - predicted) = 0}, x = (c, omega).
inline CorrectorResult arclength_corrector(GalerkinSystem const& system, Eigen::VectorXd const& predicted,
                                           Eigen::VectorXd const& tangent, ContinuationConfig const& config) {
    int const dim = system.dimension();
    Eigen::VectorXd x = predicted;
    for (int iteration = 0; iteration <= config.max_corrector_iterations; ++iteration) {
        Eigen::VectorXd const c = x.head(dim);
        double const omega = x(dim);
        Eigen::VectorXd G(dim + 1);
        G.head(dim) = system.residual(c, omega);
        G(dim) = tangent.dot(x - predicted);
        double const norm = G.norm();
        if (!std::isfinite(norm)) return {false, x, iteration};
        if (norm <= config.newton.tolerance * std::max(1.0, c.norm())) return {true, x, iteration};
        if (iteration == config.max_corrector_iterations) break;

        Eigen::MatrixXd A(dim + 1, dim + 1);
        A.topLeftCorner(dim, dim) = system.jacobian(c, omega);
        A.col(dim).head(dim) = system.omega_derivative(c);
        A.row(dim) = tangent.transpose();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        double const rcond = lu.rcond();
        if (!(rcond > 0.0) || 1.0 / rcond > config.newton.max_condition) return {false, x, iteration};
        x -= lu.solve(G);
    }
    return {false, x, config.max_corrector_iterations};
}

} // namespace detail

/// Pseudo-arclength predictor-corrector from `seed` until one of the
/// termination conditions holds. The first tangent solves the bordered
/// linearization with the amplitude direction fixed; later tangents are secants.
inline Branch continue_branch(GalerkinSystem const& system, int const n0, BranchPoint const& seed,
                              ContinuationConfig const& config = {}) {
    config.validate();
    auto const& spec = system.spec();
    int const dim = system.dimension();
    Eigen::Index const p = amplitude_position(spec, n0);

    Branch branch;
    branch.spec = spec;
    branch.n0 = n0;
    branch.omega_star = bifurcation_point(spec.kind, spec.m0, n0);
    if (seed.c.size() != dim) throw std::invalid_argument("seed has wrong dimension");
    if (seed.residual_norm > scaled_residual_bound(seed.c)) throw std::invalid_argument("seed does not satisfy the residual bound");
    branch.points.push_back(seed);

    Eigen::VectorXd x(dim + 1);
    x << seed.c, seed.omega;

    Eigen::VectorXd tangent(dim + 1);
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
        A.topLeftCorner(dim, dim) = system.jacobian(seed.c, seed.omega);
        A.col(dim).head(dim) = system.omega_derivative(seed.c);
        A(dim, p) = 1.0;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim + 1);
        rhs(dim) = seed.amplitude > 0.0 ? 1.0 : -1.0;
        tangent = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(rhs);
        tangent.normalize();
    }

    double const eps_other = 1e-2;
    double step = config.initial_step;
    double arclength = seed.arclength;

    while (true) {
        if (static_cast<int>(branch.points.size()) >= config.max_points) {
            branch.termination = Termination::MaxPointsReached;
            return branch;
        }
        auto const corrected = detail::arclength_corrector(system, x + step * tangent, tangent, config);
        if (!corrected.converged) {
            step *= config.shrink;
            if (step < config.min_step) {
                branch.termination = Termination::StepFailure;
                return branch;
            }
            continue;
        }

        Eigen::VectorXd const chord = corrected.x - x;
        double const length = chord.norm();
        if (!(length > 0.0)) {
            branch.termination = Termination::StepFailure;
            return branch;
        }
        arclength += length;
        tangent = chord / length;
        x = corrected.x;

        BranchPoint point;
        point.c = x.head(dim);
        point.omega = x(dim);
        point.amplitude = point.c(p);
        point.residual_norm = system.residual(point.c, point.omega).norm();
        point.arclength = arclength;
        branch.points.push_back(point);

        if (corrected.iterations <= config.fast_iterations) step = std::min(step * config.grow, config.max_step);

        if (point.omega > config.omega_max) {
            branch.termination = Termination::ReachedOmegaMax;
            return branch;
        }
        double const norm = point.c.norm();
        if (norm > config.norm_max) {
            branch.termination = Termination::ReachedNormMax;
            return branch;
        }
        if (norm < 1e-6) {
            for (auto const& mode : system.modes()) {
                double const lambda = eigenvalue(mode);
                if (lambda != branch.omega_star && std::abs(point.omega - lambda) < eps_other) {
                    branch.termination = Termination::ReturnedNearBifurcation;
                    branch.returned_omega = lambda;
                    return branch;
                }
            }
        }
    }
}

inline Branch trace_branch(GalerkinSystem const& system, int const n0, ContinuationConfig const& config = {}) {
    config.validate();
    return continue_branch(system, n0, seed_branch(system, n0, config), config);
}

struct ModeExponent {
    BasisIndex mode;
    double slope = 0.0;
    double fit_residual = 0.0; // RMS of log-log fit residuals
};

/// Least-squares slope of log|c_{m,n}| against log|a| over the first `count`
/// points, for every mode in the subspace (the primary mode gives exactly 1).
inline std::vector<ModeExponent> fit_local_expansion(Branch const& branch, std::size_t const count) {
    if (count < 6 || count > branch.points.size()) throw InsufficientRange("need at least 6 branch points for an exponent fit");
    double amin = std::abs(branch.points[0].amplitude);
    double amax = amin;
    for (std::size_t i = 0; i < count; ++i) {
        double const a = std::abs(branch.points[i].amplitude);
        amin = std::min(amin, a);
        amax = std::max(amax, a);
    }
    if (!(amin > 0.0) || amax < 10.0 * amin) throw InsufficientRange("amplitudes must span at least one decade");

    auto const modes = mode_set(branch.spec);
    std::vector<ModeExponent> fits;
    Eigen::MatrixXd design(static_cast<Eigen::Index>(count), 2);
    for (std::size_t i = 0; i < count; ++i) {
        design(static_cast<Eigen::Index>(i), 0) = 1.0;
        design(static_cast<Eigen::Index>(i), 1) = std::log(std::abs(branch.points[i].amplitude));
    }
    for (std::size_t a = 0; a < modes.size(); ++a) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(count));
        bool zero = false;
        for (std::size_t i = 0; i < count; ++i) {
            double const value = std::abs(branch.points[i].c(static_cast<Eigen::Index>(a)));
            if (value == 0.0) zero = true;
            y(static_cast<Eigen::Index>(i)) = std::log(value);
        }
        ModeExponent fit{modes[a], 0.0, 0.0};
        if (zero) {
            fit.slope = std::numeric_limits<double>::infinity(); // identically zero: vanishes to all orders
        } else {
            Eigen::VectorXd const beta = design.colPivHouseholderQr().solve(y);
            fit.slope = beta(1);
            fit.fit_residual = std::sqrt((design * beta - y).squaredNorm() / static_cast<double>(count));
        }
        fits.push_back(fit);
    }
    return fits;
}

/// Number of leading points whose amplitudes cover one decade from the seed.
inline std::size_t first_decade_count(Branch const& branch) {
    if (branch.points.empty()) return 0;
    double const a0 = std::abs(branch.points.front().amplitude);
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        if (std::abs(branch.points[i].amplitude) >= 10.0 * a0) return i + 1;
    }
    return branch.points.size();
}

} // namespace gpbif
