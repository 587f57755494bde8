#pragma once

// Checks on computed branch points that do not go through the Galerkin
// discretization: strong-form residual by finite differences, nodal rays of
// multipoles, and split-step time evolution of
//   i u_t = -Laplace u + (x^2 + y^2) u + |u|^2 u.

#include "gpbif/continuation.hpp"
#include "gpbif/errors.hpp"
#include "gpbif/oscillator_basis.hpp"
#include "gpbif/symmetry.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace gpbif {

namespace detail {

inline double largest_eigenvalue(SubspaceSpec const& spec) {
    double largest = 0.0;
    for (auto const& mode : mode_set(spec)) largest = std::max(largest, eigenvalue(mode));
    return largest;
}

// Real radial profile of harmonic h: sum_n c_{m_h, n} v_{m_h, n}(r).
inline double harmonic_profile(SubspaceSpec const& spec, Eigen::VectorXd const& c, int const h, double const r,
                               std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(spec.n_radial));
    int const m = (2 * h + 1) * spec.m0;
    radial_profiles(m, r, scratch);
    double sum = 0.0;
    for (int n = 0; n < spec.n_radial; ++n) sum += c(h * spec.n_radial + n) * scratch[n];
    return sum;
}

inline int harmonic_m(SubspaceSpec const& spec, int const h) {
    return spec.kind == SubspaceKind::Vortex ? spec.m0 : (2 * h + 1) * spec.m0;
}

} // namespace detail

struct StrongResidualOptions {
    double base_spacing = 0.1; // radial spacing at factor 1
};

/// Discrete L^2 norm of f(u, omega) with -Delta_m applied by second-order
/// finite differences on r_i = (i + 1/2) h, h = base_spacing / factor.
/// Includes the out-of-subspace part of |u|^2 u, so it bottoms out at the
/// Galerkin truncation floor.
inline double strong_residual(SubspaceSpec const& spec, BranchPoint const& point, int const factor,
                              StrongResidualOptions const& options = {}) {
    if (factor < 2) throw std::invalid_argument("fine radial factor must be at least 2");
    if (point.c.size() != spec.dimension()) throw std::invalid_argument("point does not match subspace");
    double const h = options.base_spacing / factor;
    double const r_max = std::sqrt(2.0 * std::max(detail::largest_eigenvalue(spec), point.omega)) + 8.0;
    auto const count = static_cast<std::size_t>(std::ceil(r_max / h));
    int const harmonics = spec.harmonics();

    std::vector<std::vector<double>> profile(harmonics, std::vector<double>(count));
    std::vector<std::vector<double>> linear(harmonics);
    std::vector<double> scratch;
    for (int hh = 0; hh < harmonics; ++hh) {
        for (std::size_t i = 0; i < count; ++i) {
            profile[hh][i] = detail::harmonic_profile(spec, point.c, hh, (static_cast<double>(i) + 0.5) * h, scratch);
        }
        linear[hh] = apply_radial_operator(detail::harmonic_m(spec, hh), profile[hh], h);
        for (std::size_t i = 0; i < count; ++i) linear[hh][i] -= point.omega * profile[hh][i];
    }

    double sum = 0.0;
    if (spec.kind == SubspaceKind::Vortex) {
        for (std::size_t i = 0; i < count; ++i) {
            double const r = (static_cast<double>(i) + 0.5) * h;
            double const phi = profile[0][i];
            double const f = linear[0][i] + phi * phi * phi;
            sum += 2.0 * std::numbers::pi * r * h * f * f;
        }
    } else {
        int const n_theta = 12 * spec.m_max() + 4;
        double const dtheta = 2.0 * std::numbers::pi / n_theta;
        std::vector<std::vector<double>> cosines(harmonics, std::vector<double>(n_theta));
        for (int hh = 0; hh < harmonics; ++hh) {
            for (int j = 0; j < n_theta; ++j) cosines[hh][j] = 2.0 * std::cos(detail::harmonic_m(spec, hh) * dtheta * j);
        }
        for (std::size_t i = 0; i < count; ++i) {
            double const r = (static_cast<double>(i) + 0.5) * h;
            for (int j = 0; j < n_theta; ++j) {
                double u = 0.0;
                double f = 0.0;
                for (int hh = 0; hh < harmonics; ++hh) {
                    u += cosines[hh][j] * profile[hh][i];
                    f += cosines[hh][j] * linear[hh][i];
                }
                f += u * u * u;
                sum += r * h * dtheta * f * f;
            }
        }
    }
    return std::sqrt(sum);
}

struct NodalOptions {
    int n_theta = 1440;
    int n_radial = 400;
    double relative_threshold = 1e-8;
};

/// Angles in [0, 2 pi) of rays on which the multipole field vanishes
/// (|u| < threshold * max|u| along the whole ray). Candidates come from sign
/// changes in theta at the radius of the peak primary profile, refined by
/// bisection, then confirmed along the ray.
inline std::vector<double> nodal_lines(SubspaceSpec const& spec, BranchPoint const& point, NodalOptions const& options = {}) {
    if (spec.kind != SubspaceKind::MultiPole) throw NotApplicable("nodal rays are defined for multipole points only");
    int const harmonics = spec.harmonics();
    double const r_cut = std::sqrt(2.0 * std::max(point.omega, eigenvalue({spec.m0, 0}))) + 4.0;
    std::vector<double> radii(options.n_radial);
    std::vector<std::vector<double>> profile(options.n_radial, std::vector<double>(harmonics));
    std::vector<double> scratch;
    for (int i = 0; i < options.n_radial; ++i) {
        radii[i] = r_cut * (i + 1.0) / options.n_radial;
        for (int hh = 0; hh < harmonics; ++hh) profile[i][hh] = detail::harmonic_profile(spec, point.c, hh, radii[i], scratch);
    }
    auto field = [&](int const i, double const theta) {
        double u = 0.0;
        for (int hh = 0; hh < harmonics; ++hh) u += 2.0 * std::cos(detail::harmonic_m(spec, hh) * theta) * profile[i][hh];
        return u;
    };

    double const dtheta = 2.0 * std::numbers::pi / options.n_theta;
    double umax = 0.0;
    int i_ref = 0;
    double best = -1.0;
    for (int i = 0; i < options.n_radial; ++i) {
        if (std::abs(profile[i][0]) > best) {
            best = std::abs(profile[i][0]);
            i_ref = i;
        }
        for (int j = 0; j < options.n_theta; ++j) umax = std::max(umax, std::abs(field(i, (j + 0.5) * dtheta)));
    }
    std::vector<double> angles;
    if (umax == 0.0) return angles;

    for (int j = 0; j < options.n_theta; ++j) {
        double lo = (j + 0.5) * dtheta;
        double hi = lo + dtheta;
        double f_lo = field(i_ref, lo);
        double const f_hi = field(i_ref, hi);
        if (f_lo == 0.0 || f_lo * f_hi > 0.0) continue;
        for (int iter = 0; iter < 80; ++iter) {
            double const mid = 0.5 * (lo + hi);
            double const f_mid = field(i_ref, mid);
            if (f_mid == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((f_mid > 0.0) == (f_lo > 0.0)) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        double const theta = 0.5 * (lo + hi);
        double ray_max = 0.0;
        for (int i = 0; i < options.n_radial; ++i) ray_max = std::max(ray_max, std::abs(field(i, theta)));
        if (ray_max < options.relative_threshold * umax) angles.push_back(std::fmod(theta, 2.0 * std::numbers::pi));
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

/// Complex samples on x_i = -L + i (2L/N), i = 0..N-1 (periodic grid), row-major in y.
struct CartesianField {
    int n = 0;
    double half_width = 0.0;
    std::vector<std::complex<double>> values; // values[iy * n + ix]

    double spacing() const { return 2.0 * half_width / n; }
    double coordinate(int const i) const { return -half_width + i * spacing(); }
    std::complex<double>& at(int const ix, int const iy) { return values[static_cast<std::size_t>(iy) * n + ix]; }
    std::complex<double> at(int const ix, int const iy) const { return values[static_cast<std::size_t>(iy) * n + ix]; }

    double mass() const {
        double sum = 0.0;
        for (auto const& v : values) sum += std::norm(v);
        return sum * spacing() * spacing();
    }
};

inline double default_half_width(double const omega) { return std::sqrt(2.0 * std::max(omega, 0.0)) + 4.0; }

namespace detail {

inline std::complex<double> evaluate_field(SubspaceSpec const& spec, Eigen::VectorXd const& c, double const x, double const y,
                                          std::vector<double>& scratch) {
    double const r = std::hypot(x, y);
    double const theta = std::atan2(y, x);
    std::complex<double> u = 0.0;
    for (int hh = 0; hh < spec.harmonics(); ++hh) u += angular_factor(spec, hh, theta) * harmonic_profile(spec, c, hh, r, scratch);
    return u;
}

} // namespace detail

/// Smallest half-width L = sqrt(2 omega) + 4 + k/2, k = 0, 1, .., for which the
/// outermost rows and columns of an n x n grid keep |u| below 1e-8 max|u|.
/// High truncation modes peak farther out than the turning point of omega, so
/// the base value is not always enough.
inline double choose_half_width(SubspaceSpec const& spec, BranchPoint const& point, int const grid_n = 256,
                                int const frame_samples = 512) {
    if (grid_n < 8) throw std::invalid_argument("Cartesian grid size must be at least 8");
    std::vector<double> scratch;
    double umax = 0.0;
    double const base = default_half_width(point.omega);
    for (int i = 0; i < 400; ++i) {
        double const r = base * (i + 0.5) / 400.0;
        for (int j = 0; j < 64; ++j) {
            double const theta = 2.0 * std::numbers::pi * j / 64.0;
            umax = std::max(umax, std::abs(detail::evaluate_field(spec, point.c, r * std::cos(theta), r * std::sin(theta), scratch)));
        }
    }
    if (umax == 0.0) return base;
    for (int k = 0; k < 40; ++k) {
        double const L = base + 0.5 * k;
        double const inner = L - 2.0 * L / grid_n; // last node before the periodic wrap
        double frame = 0.0;
        for (int i = 0; i <= frame_samples; ++i) {
            double const s = -L + 2.0 * L * i / frame_samples;
            for (double const edge : {-L, inner}) {
                frame = std::max({frame, std::abs(detail::evaluate_field(spec, point.c, s, edge, scratch)),
                                  std::abs(detail::evaluate_field(spec, point.c, edge, s, scratch))});
            }
        }
        if (frame < 0.5e-8 * umax) return L;
    }
    throw BoundaryMassTooLarge("no half-width up to base + 20 confines the field");
}

/// Direct evaluation of the spectral expansion at Cartesian nodes.
inline CartesianField to_cartesian(SubspaceSpec const& spec, BranchPoint const& point, int const n, double const half_width) {
    if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("Cartesian grid size must be a power of two >= 8");
    if (half_width < default_half_width(point.omega) - 1e-12) throw std::invalid_argument("half-width must be at least sqrt(2 omega) + 4");
    if (point.c.size() != spec.dimension()) throw std::invalid_argument("point does not match subspace");
    CartesianField field{n, half_width, std::vector<std::complex<double>>(static_cast<std::size_t>(n) * n)};
    std::vector<double> scratch;
    for (int iy = 0; iy < n; ++iy) {
        double const y = field.coordinate(iy);
        for (int ix = 0; ix < n; ++ix) {
            double const x = field.coordinate(ix);
            field.at(ix, iy) = detail::evaluate_field(spec, point.c, x, y, scratch);
        }
    }
    double umax = 0.0;
    for (auto const& v : field.values) umax = std::max(umax, std::abs(v));
    double frame = 0.0;
    for (int i = 0; i < n; ++i) {
        frame = std::max({frame, std::abs(field.at(i, 0)), std::abs(field.at(i, n - 1)), std::abs(field.at(0, i)),
                          std::abs(field.at(n - 1, i))});
    }
    if (umax > 0.0 && frame >= 1e-8 * umax) throw BoundaryMassTooLarge("field does not decay inside the Cartesian box");
    return field;
}

namespace detail {

// In-place 2D FFT pair over one buffer; plans built with FFTW_ESTIMATE so
// results do not depend on timing.
class FftPair {
  public:
    explicit FftPair(int const n) : n_(n), buffer_(fftw_alloc_complex(static_cast<std::size_t>(n) * n)) {
        if (!buffer_) throw std::bad_alloc();
        forward_ = fftw_plan_dft_2d(n, n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_2d(n, n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    FftPair(FftPair const&) = delete;
    FftPair& operator=(FftPair const&) = delete;
    ~FftPair() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }

    std::span<std::complex<double>> data() {
        return {reinterpret_cast<std::complex<double>*>(buffer_), static_cast<std::size_t>(n_) * n_};
    }
    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

  private:
    int n_;
    fftw_complex* buffer_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

} // namespace detail

struct EvolutionReport {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> periodicity; // ||e^{i omega t} u(t) - u(0)|| / ||u(0)||
    double mass_drift = 0.0;         // max relative deviation from the initial mass
    double energy_drift = 0.0;       // max relative deviation from the initial energy
};

struct EvolutionResult {
    EvolutionReport report;
    CartesianField final_field;
};

struct EvolveOptions {
    int sample_every = 100;
    double omega = 0.0; // reference frequency for the periodicity column
};

/// Strang splitting: half step of the exact pointwise flow
/// u -> u exp(-i (x^2 + y^2 + |u|^2) dt/2), full step of the exact Fourier
/// flow u^ -> u^ exp(-i k^2 dt), half pointwise step.
inline EvolutionResult evolve(CartesianField const& initial, double const T, double const dt, EvolveOptions const& options = {}) {
    if (!(dt > 0.0) || dt > 1e-3 + 1e-15) throw std::invalid_argument("time step must be in (0, 1e-3]");
    if (!(T >= 0.0) || T > 50.0) throw std::invalid_argument("final time must be in [0, 50]");
    int const n = initial.n;
    auto const steps = static_cast<long>(std::llround(T / dt));
    double const h = initial.spacing();
    double const cell = h * h;
    std::size_t const total = static_cast<std::size_t>(n) * n;

    std::vector<double> potential(total);
    std::vector<double> ksq(total);
    for (int iy = 0; iy < n; ++iy) {
        double const y = initial.coordinate(iy);
        double const ky = 2.0 * std::numbers::pi * (iy < n / 2 ? iy : iy - n) / (2.0 * initial.half_width);
        for (int ix = 0; ix < n; ++ix) {
            double const x = initial.coordinate(ix);
            double const kx = 2.0 * std::numbers::pi * (ix < n / 2 ? ix : ix - n) / (2.0 * initial.half_width);
            potential[static_cast<std::size_t>(iy) * n + ix] = x * x + y * y;
            ksq[static_cast<std::size_t>(iy) * n + ix] = kx * kx + ky * ky;
        }
    }
    std::vector<std::complex<double>> kinetic_phase(total);
    for (std::size_t i = 0; i < total; ++i) kinetic_phase[i] = std::polar(1.0 / static_cast<double>(total), -ksq[i] * dt);

    detail::FftPair fft(n);
    auto u = fft.data();
    std::copy(initial.values.begin(), initial.values.end(), u.begin());

    std::vector<std::complex<double>> spectrum(total);
    auto energy_of = [&]() {
        std::copy(u.begin(), u.end(), spectrum.begin());
        double potential_part = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            double const rho = std::norm(u[i]);
            potential_part += (potential[i] + 0.5 * rho) * rho;
        }
        fft.forward();
        double kinetic = 0.0;
        for (std::size_t i = 0; i < total; ++i) kinetic += ksq[i] * std::norm(u[i]);
        std::copy(spectrum.begin(), spectrum.end(), u.begin());
        return kinetic * cell / static_cast<double>(total) + potential_part * cell;
    };
    auto mass_of = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < total; ++i) sum += std::norm(u[i]);
        return sum * cell;
    };

    double const mass0 = mass_of();
    double const energy0 = energy_of();
    double const norm0 = std::sqrt(mass0);
    EvolutionReport report;
    auto record = [&](double const t) {
        double const mass = mass_of();
        double const energy = energy_of();
        double diff = 0.0;
        auto const phase = std::polar(1.0, options.omega * t);
        for (std::size_t i = 0; i < total; ++i) diff += std::norm(phase * u[i] - initial.values[i]);
        report.times.push_back(t);
        report.mass.push_back(mass);
        report.energy.push_back(energy);
        report.periodicity.push_back(norm0 > 0.0 ? std::sqrt(diff * cell) / norm0 : 0.0);
        if (mass0 > 0.0) report.mass_drift = std::max(report.mass_drift, std::abs(mass - mass0) / mass0);
        if (energy0 != 0.0) report.energy_drift = std::max(report.energy_drift, std::abs(energy - energy0) / std::abs(energy0));
        if (!std::isfinite(mass) || report.mass_drift > 1e-4) throw InstabilityDetected("mass drift exceeds 1e-4");
    };

    // Pointwise flow for time tau: u -> u exp(-i (V + |u|^2) tau); |u| is
    // invariant, so two consecutive half steps merge exactly into one full step.
    std::vector<std::complex<double>> trap_half(total);
    std::vector<std::complex<double>> trap_full(total);
    for (std::size_t i = 0; i < total; ++i) {
        trap_half[i] = {std::cos(0.5 * potential[i] * dt), -std::sin(0.5 * potential[i] * dt)};
        trap_full[i] = trap_half[i] * trap_half[i];
    }
    auto pointwise = [&](std::vector<std::complex<double>> const& trap, double const tau) {
        for (std::size_t i = 0; i < total; ++i) {
            double const angle = std::norm(u[i]) * tau;
            u[i] *= trap[i] * std::complex<double>(std::cos(angle), -std::sin(angle));
        }
    };

    record(0.0);
    bool open_half = false; // a trailing half pointwise step is still owed
    for (long step = 1; step <= steps; ++step) {
        if (open_half) {
            pointwise(trap_full, dt);
        } else {
            pointwise(trap_half, 0.5 * dt);
        }
        fft.forward();
        for (std::size_t i = 0; i < total; ++i) u[i] *= kinetic_phase[i];
        fft.backward();
        open_half = true;
        if (step % options.sample_every == 0 || step == steps) {
            pointwise(trap_half, 0.5 * dt);
            open_half = false;
            record(step * dt);
        }
    }

    CartesianField final_field{n, initial.half_width, std::vector<std::complex<double>>(u.begin(), u.end())};
    return {std::move(report), std::move(final_field)};
}

struct PeriodicityCheck {
    double error = 0.0; // ||e^{i omega T} u(T) - u(0)|| / ||u(0)||
    EvolutionReport report;
};

/// Evolve the synthesized point for time T and compare with the rotating-phase ansatz.
inline PeriodicityCheck periodicity_error(SubspaceSpec const& spec, BranchPoint const& point, double const T, double const dt,
                                          int const grid_n = 256, int const sample_every = 100) {
    if (point.c.size() == 0 || point.c.cwiseAbs().maxCoeff() == 0.0) {
        PeriodicityCheck trivial;
        trivial.report.times = {0.0, T};
        trivial.report.mass = {0.0, 0.0};
        trivial.report.energy = {0.0, 0.0};
        trivial.report.periodicity = {0.0, 0.0};
        return trivial;
    }
    auto const field = to_cartesian(spec, point, grid_n, choose_half_width(spec, point, grid_n));
    auto result = evolve(field, T, dt, {sample_every, point.omega});
    PeriodicityCheck check;
    check.error = result.report.periodicity.back();
    check.report = std::move(result.report);
    return check;
}

} // namespace gpbif
