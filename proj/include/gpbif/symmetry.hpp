#pragma once

// Group actions of O(2) x O(2) on polar fields, the two maximal isotropy
// subgroups, and their truncated fixed-point spaces.
//
//   Vortex(m0):    u(r,theta) = e^{i m0 theta} sum_n c_n v_{m0,n}(r)
//   MultiPole(m0): u(r,theta) = sum_{m in {m0,3m0,..}} sum_n c_{m,n} 2cos(m theta) v_{m,n}(r)
//
// Coefficients are real in both spaces.

#include "gpbif/oscillator_basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpbif {

enum class SubspaceKind { Vortex, MultiPole };

inline std::string to_string(SubspaceKind const kind) {
    return kind == SubspaceKind::Vortex ? "vortex" : "multipole";
}

struct SubspaceSpec {
    SubspaceKind kind = SubspaceKind::Vortex;
    int m0 = 1;
    int n_radial = 28;
    int m_harmonics = 1; // MultiPole only: m = m0, 3m0, .., (2M-1)m0

    static SubspaceSpec vortex(int const m0, int const n_radial = 28) {
        return {SubspaceKind::Vortex, m0, n_radial, 1};
    }
    static SubspaceSpec multipole(int const m0, int const n_radial = 28, int const m_harmonics = 4) {
        return {SubspaceKind::MultiPole, m0, n_radial, m_harmonics};
    }

    void validate() const {
        if (n_radial < 1) throw std::invalid_argument("n_radial must be at least 1");
        if (kind == SubspaceKind::Vortex) {
            if (m0 < 0) throw std::invalid_argument("vortex m0 must be non-negative");
        } else {
            if (m0 < 1) throw std::invalid_argument("multipole subspace requires m0 >= 1");
            if (m_harmonics < 1) throw std::invalid_argument("m_harmonics must be at least 1");
        }
    }

    int harmonics() const { return kind == SubspaceKind::Vortex ? 1 : m_harmonics; }
    int dimension() const { return harmonics() * n_radial; }
    int m_max() const { return kind == SubspaceKind::Vortex ? m0 : (2 * m_harmonics - 1) * m0; }

    // Squared L^2 norm of one mode function: 1 for e^{im theta}v, 2 for 2cos(m theta)v.
    double mode_norm_sq() const { return kind == SubspaceKind::Vortex ? 1.0 : 2.0; }

    friend bool operator==(SubspaceSpec const&, SubspaceSpec const&) = default;
};

/// Vortex: (m0,0)..(m0,N-1). MultiPole: m-major over m0,3m0,..,(2M-1)m0, n-minor.
inline std::vector<BasisIndex> mode_set(SubspaceSpec const& spec) {
    spec.validate();
    std::vector<BasisIndex> modes;
    modes.reserve(static_cast<std::size_t>(spec.dimension()));
    for (int h = 0; h < spec.harmonics(); ++h) {
        int const m = (2 * h + 1) * spec.m0;
        for (int n = 0; n < spec.n_radial; ++n) modes.push_back({spec.kind == SubspaceKind::Vortex ? spec.m0 : m, n});
    }
    return modes;
}

inline std::optional<std::size_t> mode_position(SubspaceSpec const& spec, BasisIndex const index) {
    auto const modes = mode_set(spec);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] == index) return i;
    }
    return std::nullopt;
}

struct CoefficientVector {
    SubspaceSpec spec;
    Eigen::VectorXd values;

    static CoefficientVector zero(SubspaceSpec const& spec) {
        return {spec, Eigen::VectorXd::Zero(spec.dimension())};
    }

    double at(BasisIndex const index) const {
        auto const pos = mode_position(spec, index);
        if (!pos) throw std::out_of_range("mode not in subspace");
        return values(static_cast<Eigen::Index>(*pos));
    }
    double& at(BasisIndex const index) {
        auto const pos = mode_position(spec, index);
        if (!pos) throw std::out_of_range("mode not in subspace");
        return values(static_cast<Eigen::Index>(*pos));
    }
};

struct Simplicity {
    bool simple = true;
    std::vector<BasisIndex> clashes; // (l m0, n), l = 3,5,.., with l m0 + 2n = m0 + 2 n0
};

/// Whether lambda_{m0,n0} is simple in the multipole fixed-point space.
inline Simplicity check_simplicity(int const m0, int const n0) {
    if (m0 < 1 || n0 < 0) throw std::invalid_argument("check_simplicity requires m0 >= 1 and n0 >= 0");
    Simplicity result;
    for (int l = 3; (l - 1) * m0 <= 2 * n0; l += 2) {
        int const twice_n = 2 * n0 - (l - 1) * m0; // (l-1) even, so always even
        result.clashes.push_back({l * m0, twice_n / 2});
    }
    result.simple = result.clashes.empty();
    return result;
}

/// Complex samples u(r_k, theta_j) on a radial rule times a uniform angular grid.
struct FieldGrid {
    RadialRule radial;
    int n_theta = 2;
    std::vector<std::complex<double>> values; // values[k * n_theta + j]

    std::complex<double>& at(std::size_t const k, int const j) { return values[k * n_theta + j]; }
    std::complex<double> at(std::size_t const k, int const j) const { return values[k * n_theta + j]; }
    double theta(int const j) const { return 2.0 * std::numbers::pi * j / n_theta; }
};

namespace detail {

// rows: modes, columns: radial nodes
inline Eigen::MatrixXd radial_table(SubspaceSpec const& spec, RadialRule const& rule) {
    Eigen::MatrixXd table(spec.dimension(), static_cast<Eigen::Index>(rule.size()));
    std::vector<double> values(static_cast<std::size_t>(spec.n_radial));
    for (int h = 0; h < spec.harmonics(); ++h) {
        int const m = (2 * h + 1) * spec.m0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            radial_profiles(m, rule.nodes[k], values);
            for (int n = 0; n < spec.n_radial; ++n) table(h * spec.n_radial + n, static_cast<Eigen::Index>(k)) = values[n];
        }
    }
    return table;
}

// Angular factor of mode `h` at angle theta.
inline std::complex<double> angular_factor(SubspaceSpec const& spec, int const h, double const theta) {
    if (spec.kind == SubspaceKind::Vortex) return std::polar(1.0, spec.m0 * theta);
    return {2.0 * std::cos((2 * h + 1) * spec.m0 * theta), 0.0};
}

} // namespace detail

inline FieldGrid synthesize(CoefficientVector const& coeffs, RadialRule const& radial, int const n_theta) {
    auto const& spec = coeffs.spec;
    if (coeffs.values.size() != spec.dimension()) throw std::invalid_argument("coefficient length does not match subspace");
    auto const table = detail::radial_table(spec, radial);
    FieldGrid field{radial, n_theta, std::vector<std::complex<double>>(radial.size() * n_theta)};
    for (int h = 0; h < spec.harmonics(); ++h) {
        Eigen::VectorXd const profile =
            table.middleRows(h * spec.n_radial, spec.n_radial).transpose() * coeffs.values.segment(h * spec.n_radial, spec.n_radial);
        for (int j = 0; j < n_theta; ++j) {
            auto const phase = detail::angular_factor(spec, h, field.theta(j));
            for (std::size_t k = 0; k < radial.size(); ++k) field.at(k, j) += phase * profile(static_cast<Eigen::Index>(k));
        }
    }
    return field;
}

inline FieldGrid synthesize(CoefficientVector const& coeffs, QuadratureGrid const& grid) {
    return synthesize(coeffs, grid.bilinear, grid.n_theta);
}

inline double l2_norm(FieldGrid const& field) {
    double const dtheta = 2.0 * std::numbers::pi / field.n_theta;
    double sum = 0.0;
    for (std::size_t k = 0; k < field.radial.size(); ++k) {
        for (int j = 0; j < field.n_theta; ++j) sum += field.radial.weights[k] * dtheta * std::norm(field.at(k, j));
    }
    return std::sqrt(sum);
}

struct Projection {
    CoefficientVector coefficients;
    double remainder_norm = 0.0;
};

/// Real-linear orthogonal projection onto the fixed-point space:
/// c = Re<u, mode> / ||mode||^2 under the field's own quadrature.
inline Projection analyze(FieldGrid const& field, SubspaceSpec const& spec) {
    auto const table = detail::radial_table(spec, field.radial);
    auto coeffs = CoefficientVector::zero(spec);
    double const dtheta = 2.0 * std::numbers::pi / field.n_theta;
    for (int h = 0; h < spec.harmonics(); ++h) {
        for (int n = 0; n < spec.n_radial; ++n) {
            Eigen::Index const row = h * spec.n_radial + n;
            double sum = 0.0;
            for (int j = 0; j < field.n_theta; ++j) {
                auto const phase = std::conj(detail::angular_factor(spec, h, field.theta(j)));
                for (std::size_t k = 0; k < field.radial.size(); ++k) {
                    sum += field.radial.weights[k] * dtheta * table(row, static_cast<Eigen::Index>(k)) *
                           (phase * field.at(k, j)).real();
                }
            }
            coeffs.values(row) = sum / spec.mode_norm_sq();
        }
    }
    auto residual = synthesize(coeffs, field.radial, field.n_theta);
    for (std::size_t i = 0; i < residual.values.size(); ++i) residual.values[i] = field.values[i] - residual.values[i];
    return {coeffs, l2_norm(residual)};
}

/// Element of O(2) x O(2): rotation psi, phase phi, reflection kappa,
/// conjugation kappa-bar. Applied as phase, rotation, reflection, conjugation:
///   (g u)(theta) = conj^{kbar}( e^{i phi} u(s theta + psi) ),  s = -1 if kappa.
struct GroupElement {
    double rotation = 0.0;
    double phase = 0.0;
    bool reflect = false;
    bool conjugate = false;
};

inline FieldGrid apply_group(GroupElement const& g, FieldGrid const& field) {
    double const cell = 2.0 * std::numbers::pi / field.n_theta;
    double const shift_real = g.rotation / cell;
    double const shift_round = std::round(shift_real);
    if (std::abs(shift_real - shift_round) > 1e-9) throw std::invalid_argument("rotation is not aligned with the angular grid");
    int const n = field.n_theta;
    int const shift = static_cast<int>(((static_cast<long long>(shift_round) % n) + n) % n);
    auto const phase = std::polar(1.0, g.phase);
    FieldGrid out = field;
    for (std::size_t k = 0; k < field.radial.size(); ++k) {
        for (int j = 0; j < n; ++j) {
            int const source_j = g.reflect ? ((-j + shift) % n + n) % n : (j + shift) % n;
            auto value = phase * field.at(k, source_j);
            if (g.conjugate) value = std::conj(value);
            out.at(k, j) = value;
        }
    }
    return out;
}

/// Generators of the isotropy group whose fixed-point space is `spec`.
/// Vortex: (psi, -m0 psi) for every grid angle psi, and kappa kappa-bar.
/// MultiPole: kappa, kappa-bar, and (rotation pi/m0, phase pi).
inline std::vector<GroupElement> isotropy_generators(SubspaceSpec const& spec, int const n_theta) {
    std::vector<GroupElement> gens;
    if (spec.kind == SubspaceKind::Vortex) {
        for (int j = 0; j < n_theta; ++j) {
            double const psi = 2.0 * std::numbers::pi * j / n_theta;
            gens.push_back({psi, -spec.m0 * psi, false, false});
        }
        gens.push_back({0.0, 0.0, true, true});
    } else {
        gens.push_back({0.0, 0.0, true, false});
        gens.push_back({0.0, 0.0, false, true});
        gens.push_back({std::numbers::pi / spec.m0, std::numbers::pi, false, false});
    }
    return gens;
}

inline double max_abs_difference(FieldGrid const& a, FieldGrid const& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    return worst;
}

} // namespace gpbif
