#pragma once

// Symmetry-reduced Galerkin form of f(u, omega) = -Laplace u + (r^2 - omega + |u|^2) u.
//
// For coefficients c in a fixed-point space the residual is the coefficient
// of f in the mode expansion,
//   F_a(c, omega) = (lambda_a - omega) c_a + <|u|^2 u, mode_a> / ||mode_a||^2,
// which vanishes exactly when the projection of f onto the subspace does.
// Both subspaces reduce to a real field sampled at weighted points:
//   Vortex:    |u|^2 u = phi^3 e^{i m0 theta}, phi the real radial profile,
//              so only the quartic radial rule is needed.
//   MultiPole: u is real; tensor-product quartic radial x uniform angular rule.

#include "gpbif/errors.hpp"
#include "gpbif/oscillator_basis.hpp"
#include "gpbif/symmetry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace gpbif {

using ResidualVector = Eigen::VectorXd;
using JacobianMatrix = Eigen::MatrixXd;

class GalerkinSystem {
  public:
    explicit GalerkinSystem(SubspaceSpec const& spec)
        : spec_(spec), modes_(mode_set(spec)), quadrature_(build_quadrature(spec.n_radial, spec.m_max())) {
        int const dim = spec.dimension();
        eigenvalues_.resize(dim);
        for (int a = 0; a < dim; ++a) eigenvalues_(a) = eigenvalue(modes_[a]);

        auto const radial = detail::radial_table(spec, quadrature_.quartic);
        auto const n_r = static_cast<Eigen::Index>(quadrature_.quartic.size());
        if (spec.kind == SubspaceKind::Vortex) {
            samples_ = radial;
            weights_.resize(n_r);
            for (Eigen::Index k = 0; k < n_r; ++k) weights_(k) = 2.0 * std::numbers::pi * quadrature_.quartic.weights[k];
        } else {
            int const n_theta = quadrature_.n_theta;
            samples_.resize(dim, n_r * n_theta);
            weights_.resize(n_r * n_theta);
            for (int j = 0; j < n_theta; ++j) {
                double const theta = quadrature_.theta(j);
                for (Eigen::Index k = 0; k < n_r; ++k) {
                    Eigen::Index const p = j * n_r + k;
                    weights_(p) = quadrature_.quartic.weights[k] * quadrature_.angular_weight();
                    for (int a = 0; a < dim; ++a) samples_(a, p) = 2.0 * std::cos(modes_[a].m * theta) * radial(a, k);
                }
            }
        }
    }

    SubspaceSpec const& spec() const noexcept { return spec_; }
    std::vector<BasisIndex> const& modes() const noexcept { return modes_; }
    QuadratureGrid const& quadrature() const noexcept { return quadrature_; }
    Eigen::VectorXd const& eigenvalues() const noexcept { return eigenvalues_; }
    int dimension() const noexcept { return spec_.dimension(); }

    // Real field values at the weighted sample points.
    Eigen::VectorXd sample(Eigen::VectorXd const& c) const { return samples_.transpose() * c; }

    ResidualVector linear_part(Eigen::VectorXd const& c, double const omega) const {
        return (eigenvalues_.array() - omega).matrix().cwiseProduct(c);
    }

    ResidualVector cubic_part(Eigen::VectorXd const& c) const {
        Eigen::VectorXd const u = sample(c);
        Eigen::VectorXd const integrand = weights_.cwiseProduct(u.cwiseProduct(u).cwiseProduct(u));
        return samples_ * integrand / spec_.mode_norm_sq();
    }

    ResidualVector residual(Eigen::VectorXd const& c, double const omega) const {
        return linear_part(c, omega) + cubic_part(c);
    }

    /// Compact form c - omega K c + K N(c), K = diag(1/lambda).
    ResidualVector fixed_point_residual(Eigen::VectorXd const& c, double const omega) const {
        return residual(c, omega).cwiseQuotient(eigenvalues_);
    }

    /// diag(lambda - omega) + <3u^2 mode_b, mode_a> / ||mode||^2.
    JacobianMatrix jacobian(Eigen::VectorXd const& c, double const omega) const {
        Eigen::VectorXd const u = sample(c);
        Eigen::VectorXd const scale = 3.0 * weights_.cwiseProduct(u.cwiseProduct(u)) / spec_.mode_norm_sq();
        JacobianMatrix J = samples_ * scale.asDiagonal() * samples_.transpose();
        J.diagonal() += (eigenvalues_.array() - omega).matrix();
        return J;
    }

    /// dF/domega.
    Eigen::VectorXd omega_derivative(Eigen::VectorXd const& c) const { return -c; }

    /// E(c, omega) = 1/2 sum (lambda - omega) c^2 + <|u|^4, 1> / (4 ||mode||^2);
    /// its gradient in c is the residual.
    double energy(Eigen::VectorXd const& c, double const omega) const {
        Eigen::VectorXd const u = sample(c);
        double const quartic = weights_.dot(u.cwiseProduct(u).cwiseProduct(u).cwiseProduct(u));
        return 0.5 * (eigenvalues_.array() - omega).matrix().dot(c.cwiseProduct(c)) + quartic / (4.0 * spec_.mode_norm_sq());
    }

  private:
    SubspaceSpec spec_;
    std::vector<BasisIndex> modes_;
    QuadratureGrid quadrature_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd samples_; // dim x points
    Eigen::VectorXd weights_;
};

/// Largest |c_{m, N-1}| over the retained harmonics, relative to max |c|.
/// Above 1e-6 the truncation is flagged as under-resolved.
inline double truncation_tail(SubspaceSpec const& spec, Eigen::VectorXd const& c) {
    double const largest = c.cwiseAbs().maxCoeff();
    if (largest == 0.0) return 0.0;
    double tail = 0.0;
    for (int h = 0; h < spec.harmonics(); ++h) tail = std::max(tail, std::abs(c(h * spec.n_radial + spec.n_radial - 1)));
    return tail / largest;
}

inline bool under_resolved(SubspaceSpec const& spec, Eigen::VectorXd const& c, double const threshold = 1e-6) {
    return truncation_tail(spec, c) > threshold;
}

struct NewtonOptions {
    double tolerance = 1e-11;   // on ||F|| / max(1, ||c||)
    int max_iterations = 25;
    int max_halvings = 8;
    double max_condition = 1e14;
};

/// Fix coefficient `position` to `value`; omega then becomes an unknown.
struct Pin {
    Eigen::Index position = 0;
    double value = 0.0;
};

struct NewtonResult {
    Eigen::VectorXd c;
    double omega = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
};

namespace detail {

inline void check_condition(Eigen::PartialPivLU<Eigen::MatrixXd> const& lu, double const max_condition) {
    double const rcond = lu.rcond();
    if (!(rcond > 0.0) || !std::isfinite(rcond) || 1.0 / rcond > max_condition) {
        throw SingularJacobian("Jacobian condition estimate exceeds " + std::to_string(max_condition));
    }
}

} // namespace detail

/// Newton's method on F(c, omega) = 0 at fixed omega, or, with a pin, on the
/// bordered system {F = 0, c_p = value} in the unknowns (c, omega). Undamped,
/// with step halving when the residual norm grows. The Jacobian conditioning is
/// checked at every iterate including the returned one.
inline NewtonResult newton_solve(GalerkinSystem const& system, Eigen::VectorXd c, double omega,
                                 std::optional<Pin> const& pin = std::nullopt, NewtonOptions const& options = {}) {
    int const dim = system.dimension();
    if (c.size() != dim) throw std::invalid_argument("initial guess has wrong length");
    if (pin && (pin->position < 0 || pin->position >= dim)) throw std::invalid_argument("pinned mode outside subspace");
    Eigen::Index const size = pin ? dim + 1 : dim;

    auto equations = [&](Eigen::VectorXd const& cc, double const w) {
        Eigen::VectorXd F(size);
        F.head(dim) = system.residual(cc, w);
        if (pin) F(dim) = cc(pin->position) - pin->value;
        return F;
    };

    Eigen::VectorXd F = equations(c, omega);
    for (int iteration = 0;; ++iteration) {
        Eigen::MatrixXd A(size, size);
        A.topLeftCorner(dim, dim) = system.jacobian(c, omega);
        if (pin) {
            A.col(dim).head(dim) = system.omega_derivative(c);
            A.row(dim).setZero();
            A(dim, pin->position) = 1.0;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        detail::check_condition(lu, options.max_condition);

        double const norm = F.norm();
        if (!std::isfinite(norm)) throw NonConvergence("Newton residual is not finite");
        if (norm <= options.tolerance * std::max(1.0, c.norm())) return {c, omega, iteration, norm};
        if (iteration >= options.max_iterations) {
            throw NonConvergence("Newton did not converge in " + std::to_string(options.max_iterations) + " iterations");
        }

        Eigen::VectorXd const delta = lu.solve(-F);
        double step = 1.0;
        Eigen::VectorXd trial_c;
        double trial_omega = omega;
        Eigen::VectorXd trial_F;
        for (int halving = 0;; ++halving) {
            trial_c = c + step * delta.head(dim);
            trial_omega = pin ? omega + step * delta(dim) : omega;
            trial_F = equations(trial_c, trial_omega);
            if (trial_F.norm() <= norm || halving >= options.max_halvings) break;
            step *= 0.5;
        }
        c = std::move(trial_c);
        omega = trial_omega;
        F = std::move(trial_F);
    }
}

} // namespace gpbif
