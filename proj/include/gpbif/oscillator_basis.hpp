#pragma once

// Eigenpairs of the isotropic 2D harmonic oscillator -Laplace + r^2 in polar
// form, v_{m,n}(r) e^{i m theta}, together with the radial Gauss rules used by
// every Galerkin integral in the library.
//
// Normalization: integral_0^inf v_{m,n}(r)^2 r dr = 1/(2 pi), so that the full
// mode v_{m,n}(r) e^{i m theta} has unit norm in L^2(R^2).

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace gpbif {

struct BasisIndex {
    int m = 0; // angular wavenumber
    int n = 0; // radial quantum number, n >= 0

    friend bool operator==(BasisIndex const&, BasisIndex const&) = default;
};

/// Oscillator eigenvalue 2(|m| + 2n + 1).
inline double eigenvalue(BasisIndex const index) {
    return 2.0 * (std::abs(index.m) + 2 * index.n + 1);
}

namespace detail {

// Orthonormal Laguerre functions
//   l_k(x) = sqrt(k!/Gamma(k+alpha+1)) x^{alpha/2} e^{-x/2} L_k^{(alpha)}(x),
// integral_0^inf l_k l_j dx = delta_kj, for k = 0..count-1 via the three-term
// recurrence. Stays bounded for large x and large k.
inline void laguerre_functions(int const alpha, double const x, std::span<double> out) {
    if (out.empty()) return;
    double const a = alpha;
    double l0;
    if (x <= 0.0) {
        l0 = (alpha == 0) ? 1.0 : 0.0;
    } else {
        l0 = std::exp(0.5 * a * std::log(x) - 0.5 * x - 0.5 * std::lgamma(a + 1.0));
    }
    out[0] = l0;
    if (out.size() == 1) return;
    out[1] = (1.0 + a - x) * l0 / std::sqrt(1.0 + a);
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        double const kk = static_cast<double>(k);
        out[k + 1] = ((2.0 * kk + 1.0 + a - x) * out[k] - std::sqrt(kk * (kk + a)) * out[k - 1]) /
                     std::sqrt((kk + 1.0) * (kk + 1.0 + a));
    }
}

} // namespace detail

/// All radial profiles v_{m,0}(r) .. v_{m,count-1}(r) at one radius.
inline void radial_profiles(int const m, double const r, std::span<double> out) {
    detail::laguerre_functions(std::abs(m), r * r, out);
    double const scale = 1.0 / std::sqrt(std::numbers::pi);
    for (auto& value : out) value *= scale;
}

/// v_{m,n}(r) = C_{m,n} r^{|m|} L_n^{(|m|)}(r^2) e^{-r^2/2}.
class RadialEigenfunction {
  public:
    explicit RadialEigenfunction(BasisIndex const index) : index_(index) {
        if (index.n < 0) throw std::invalid_argument("radial quantum number n must be non-negative");
        int const alpha = std::abs(index.m);
        // C^2 = n! / (pi (n+|m|)!)
        normalization_ = std::exp(0.5 * (std::lgamma(index.n + 1.0) - std::lgamma(index.n + alpha + 1.0))) /
                         std::sqrt(std::numbers::pi);
    }

    BasisIndex index() const noexcept { return index_; }
    double normalization() const noexcept { return normalization_; }
    int degree() const noexcept { return index_.n; }
    double eigenvalue() const noexcept { return gpbif::eigenvalue(index_); }

    double operator()(double const r) const {
        std::vector<double> values(static_cast<std::size_t>(index_.n) + 1);
        radial_profiles(index_.m, r, values);
        return values.back();
    }

  private:
    BasisIndex index_;
    double normalization_ = 0.0;
};

inline RadialEigenfunction build_eigenfunction(BasisIndex const index) {
    return RadialEigenfunction(index);
}

/// Second-order finite-difference application of -Delta_m + r^2,
/// Delta_m = d^2/dr^2 + r^{-1} d/dr - m^2 r^{-2}, on the cell-centred grid
/// r_i = (i + 1/2) h. The ghost value at r = -h/2 uses the parity
/// v(-r) = (-1)^m v(r); the function is taken to vanish past the last node.
/// Test oracle only; the Galerkin path never calls this.
inline std::vector<double> apply_radial_operator(int const m, std::span<double const> samples, double const h) {
    if (samples.size() < 8) throw std::invalid_argument("radial grid too coarse: need at least 8 points");
    if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    std::size_t const count = samples.size();
    double const m2 = static_cast<double>(m) * m;
    double const parity = (std::abs(m) % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        double const r = (static_cast<double>(i) + 0.5) * h;
        double const u = samples[i];
        double const left = (i == 0) ? parity * samples[0] : samples[i - 1];
        double const right = (i + 1 == count) ? 0.0 : samples[i + 1];
        double const second = (right - 2.0 * u + left) / (h * h);
        double const first = (right - left) / (2.0 * h);
        out[i] = -(second + first / r - m2 * u / (r * r)) + r * r * u;
    }
    return out;
}

/// Radial rule for integral_0^inf g(r) r dr ~= sum_k weights[k] g(nodes[k]).
struct RadialRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

// Laguerre functions phi_k(t) = L_k(t) e^{-t/2} (alpha = 0); |phi_k| <= 1.
inline void laguerre_phi_pair(int const order, double const t, double& phi_k, double& phi_km1) {
    double prev = std::exp(-0.5 * t);
    double curr = (1.0 - t) * prev;
    if (order == 0) {
        phi_k = prev;
        phi_km1 = 0.0;
        return;
    }
    for (int k = 1; k < order; ++k) {
        double const next = ((2.0 * k + 1.0 - t) * curr - k * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    phi_k = curr;
    phi_km1 = prev;
}

} // namespace detail

/// Gauss-Laguerre nodes t_i and exponentially scaled weights w_i e^{t_i}
/// (so that integral_0^inf e^{-t} p(t) dt = sum w_i p(t_i) exactly for
/// deg p <= 2K-1). Golub-Welsch start, Newton polish, weights from
/// w_i e^{t_i} = t_i / ((K+1)^2 phi_{K+1}(t_i)^2).
inline void gauss_laguerre(int const count, std::vector<double>& nodes, std::vector<double>& scaled_weights) {
    if (count < 1) throw std::invalid_argument("Gauss-Laguerre rule needs at least one node");
    Eigen::VectorXd diag(count);
    Eigen::VectorXd sub(std::max(count - 1, 1));
    for (int i = 0; i < count; ++i) diag(i) = 2.0 * i + 1.0;
    for (int i = 0; i + 1 < count; ++i) sub(i) = i + 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(count - 1), Eigen::EigenvaluesOnly);
    nodes.resize(count);
    scaled_weights.resize(count);
    for (int i = 0; i < count; ++i) {
        double t = solver.eigenvalues()(i);
        for (int iter = 0; iter < 10; ++iter) {
            double phi, phi_prev;
            detail::laguerre_phi_pair(count, t, phi, phi_prev);
            double const step = t * phi / (count * (phi - phi_prev));
            t -= step;
            if (std::abs(step) <= 1e-15 * t) break;
        }
        double phi_next, phi;
        detail::laguerre_phi_pair(count + 1, t, phi_next, phi);
        nodes[i] = t;
        scaled_weights[i] = t / ((count + 1.0) * (count + 1.0) * phi_next * phi_next);
    }
}

/// Radial rule from Gauss-Laguerre in t = scale * r^2. With scale = 2 it is
/// exact for r^{2 alpha} p(r^2) e^{-2 r^2} (quartic products of modes); with
/// scale = 1 for r^{2 alpha} p(r^2) e^{-r^2} (bilinear products).
inline RadialRule gauss_laguerre_radial(int const count, double const scale) {
    RadialRule rule;
    std::vector<double> t;
    std::vector<double> w;
    gauss_laguerre(count, t, w);
    rule.nodes.resize(t.size());
    rule.weights.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        rule.nodes[i] = std::sqrt(t[i] / scale);
        rule.weights[i] = w[i] / (2.0 * scale);
    }
    return rule;
}

/// Quadrature for a truncation with radial modes n < n_radial and |m| <= m_max.
///
/// `quartic` integrates every product of four modes exactly (nonlinear
/// residual and Jacobian); `bilinear` integrates every product of two modes
/// exactly (Gram matrices, projections). No single Gauss-Laguerre rule does
/// both, since the Gaussian factors differ (e^{-2r^2} vs e^{-r^2}).
/// Angular nodes theta_j = 2 pi j / n_theta are shared; n_theta is even,
/// > 6 m_max, and a multiple of 2 m_max so rotations by pi/m0 stay on the grid.
struct QuadratureGrid {
    RadialRule quartic;
    RadialRule bilinear;
    int n_theta = 2;

    double theta(int const j) const { return 2.0 * std::numbers::pi * j / n_theta; }
    double angular_weight() const { return 2.0 * std::numbers::pi / n_theta; }
};

inline int angular_node_count(int const m_max) {
    return m_max <= 0 ? 2 : 8 * m_max;
}

inline QuadratureGrid build_quadrature(int const n_radial, int const m_max) {
    if (n_radial < 1) throw std::invalid_argument("n_radial must be at least 1");
    if (m_max < 0) throw std::invalid_argument("m_max must be non-negative");
    QuadratureGrid grid;
    // quartic: degree in t of a product of four modes <= 4(n_radial-1) + 2 m_max
    grid.quartic = gauss_laguerre_radial(2 * n_radial + m_max, 2.0);
    // bilinear: degree <= 2(n_radial-1) + m_max
    grid.bilinear = gauss_laguerre_radial(n_radial + m_max / 2 + 1, 1.0);
    grid.n_theta = angular_node_count(m_max);
    return grid;
}

/// Strict sign changes of v_{m,n} on (0, r_cut), r_cut = sqrt(2 lambda) + 6.
inline int count_nodes(BasisIndex const index) {
    if (index.n < 0) throw std::invalid_argument("radial quantum number n must be non-negative");
    double const r_cut = std::sqrt(2.0 * eigenvalue(index)) + 6.0;
    constexpr int samples = 20000;
    std::vector<double> values(static_cast<std::size_t>(index.n) + 1);
    int changes = 0;
    double last_sign = 0.0;
    for (int i = 1; i < samples; ++i) {
        double const r = r_cut * i / samples;
        radial_profiles(index.m, r, values);
        double const v = values.back();
        if (v == 0.0) continue;
        double const sign = v > 0.0 ? 1.0 : -1.0;
        if (last_sign != 0.0 && sign != last_sign) ++changes;
        last_sign = sign;
    }
    return changes;
}

/// |2 pi integral v^2 r dr - 1| under the bilinear rule.
inline double norm_error(BasisIndex const index) {
    auto const rule = gauss_laguerre_radial(index.n + std::abs(index.m) / 2 + 2, 1.0);
    std::vector<double> values(static_cast<std::size_t>(index.n) + 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        radial_profiles(index.m, rule.nodes[k], values);
        sum += rule.weights[k] * values.back() * values.back();
    }
    return std::abs(2.0 * std::numbers::pi * sum - 1.0);
}

} // namespace gpbif
