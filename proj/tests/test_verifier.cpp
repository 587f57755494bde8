#include "gpbif/verifier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gpbif;

namespace {

BranchPoint solved_point(SubspaceSpec const& spec, double const amplitude) {
    GalerkinSystem const system(spec);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(system.dimension());
    c(0) = amplitude;
    auto const result = newton_solve(system, c, eigenvalue({spec.m0, 0}), Pin{0, amplitude});
    BranchPoint point;
    point.c = result.c;
    point.omega = result.omega;
    point.amplitude = amplitude;
    point.residual_norm = result.residual_norm;
    return point;
}

} // namespace

TEST(StrongResidual, SecondOrderDecay) {
    for (auto const& spec : {SubspaceSpec::vortex(1, 16), SubspaceSpec::multipole(1, 16, 3)}) {
        auto const point = solved_point(spec, 0.4);
        double const r4 = strong_residual(spec, point, 4);
        double const r8 = strong_residual(spec, point, 8);
        EXPECT_NEAR(std::log2(r4 / r8), 2.0, 0.2);
    }
}

TEST(StrongResidual, DetectsCorruptedPoint) {
    auto const spec = SubspaceSpec::multipole(1, 16, 3);
    auto point = solved_point(spec, 0.4);
    double const clean = strong_residual(spec, point, 16);
    point.c(2) += 1e-3;
    EXPECT_GE(strong_residual(spec, point, 16), 10.0 * clean);
    point = solved_point(spec, 0.4);
    point.omega += 1e-3;
    EXPECT_GE(strong_residual(spec, point, 16), 10.0 * clean);
}

TEST(StrongResidual, RejectsSmallFactor) {
    auto const spec = SubspaceSpec::vortex(1, 8);
    EXPECT_THROW(strong_residual(spec, solved_point(spec, 0.1), 1), std::invalid_argument);
}

TEST(NodalLines, DipoleAndQuadrupole) {
    for (int m0 : {1, 2, 3}) {
        auto const spec = SubspaceSpec::multipole(m0, 12, 3);
        auto const angles = nodal_lines(spec, solved_point(spec, 0.5));
        ASSERT_EQ(angles.size(), static_cast<std::size_t>(2 * m0));
        for (std::size_t k = 0; k < angles.size(); ++k) {
            EXPECT_NEAR(angles[k], (k + 0.5) * std::numbers::pi / m0, 2.0 * std::numbers::pi / 1440);
        }
    }
}

TEST(NodalLines, NotApplicableToVortex) {
    auto const spec = SubspaceSpec::vortex(1, 8);
    EXPECT_THROW(nodal_lines(spec, solved_point(spec, 0.2)), NotApplicable);
}

TEST(Cartesian, MassMatchesCoefficientNorm) {
    for (auto const& spec : {SubspaceSpec::vortex(2, 12), SubspaceSpec::multipole(1, 12, 3)}) {
        auto const point = solved_point(spec, 0.5);
        auto const field = to_cartesian(spec, point, 128, choose_half_width(spec, point, 128));
        EXPECT_NEAR(field.mass(), spec.mode_norm_sq() * point.c.squaredNorm(), 1e-10);
    }
}

TEST(Cartesian, DipoleSymmetry) {
    auto const spec = SubspaceSpec::multipole(1, 12, 3);
    auto const point = solved_point(spec, 0.5);
    int const n = 64;
    auto const field = to_cartesian(spec, point, n, choose_half_width(spec, point, n));
    double scale = 0.0;
    for (auto const& v : field.values) scale = std::max(scale, std::abs(v));
    for (int iy = 1; iy < n; ++iy) {
        for (int ix = 1; ix < n; ++ix) {
            auto const u = field.at(ix, iy);
            EXPECT_LE(std::abs(u.imag()), 1e-12 * scale);
            EXPECT_LE(std::abs(u - field.at(ix, n - iy)), 1e-12 * scale);
            EXPECT_LE(std::abs(u + field.at(n - ix, n - iy)), 1e-12 * scale);
        }
    }
}

TEST(Cartesian, Validation) {
    auto const spec = SubspaceSpec::vortex(1, 20);
    auto point = solved_point(spec, 0.2);
    double const L = default_half_width(point.omega);
    EXPECT_THROW(to_cartesian(spec, point, 100, L), std::invalid_argument);
    EXPECT_THROW(to_cartesian(spec, point, 64, 0.5 * L), std::invalid_argument);
    point.c(19) = 1.0;
    EXPECT_THROW(to_cartesian(spec, point, 64, L), BoundaryMassTooLarge);
}

TEST(Evolution, LinearLimitOfGroundState) {
    auto const spec = SubspaceSpec::vortex(0, 4);
    BranchPoint point;
    point.c = Eigen::VectorXd::Zero(4);
    point.c(0) = 1e-5;
    point.omega = 2.0;
    auto const check = periodicity_error(spec, point, 1.0, 1e-3, 128);
    EXPECT_LT(check.error, 1e-6);
}

TEST(Evolution, WrongFrequencyIsDetected) {
    auto const spec = SubspaceSpec::vortex(1, 12);
    auto point = solved_point(spec, 0.4);
    double const T = 2.0;
    double const right = periodicity_error(spec, point, T, 1e-3, 128).error;
    EXPECT_LT(right, 1e-4);
    point.omega += 0.1;
    auto const wrong = periodicity_error(spec, point, T, 1e-3, 128).error;
    EXPECT_NEAR(wrong, 2.0 * std::sin(0.05 * T), 1e-3);
}

TEST(Evolution, ConservesMassAndEnergy) {
    auto const spec = SubspaceSpec::multipole(1, 12, 3);
    auto const point = solved_point(spec, 0.6);
    auto const field = to_cartesian(spec, point, 128, choose_half_width(spec, point, 128));
    auto const result = evolve(field, 1.0, 1e-3, {100, point.omega});
    EXPECT_LT(result.report.mass_drift, 1e-10);
    EXPECT_LT(result.report.energy_drift, 1e-6);
    EXPECT_EQ(result.report.times.size(), 11u);
    EXPECT_LT(result.report.periodicity.back(), 1e-4);
}

TEST(Evolution, Validation) {
    CartesianField field{8, 4.0, std::vector<std::complex<double>>(64, 0.1)};
    EXPECT_THROW(evolve(field, 1.0, 2e-3), std::invalid_argument);
    EXPECT_THROW(evolve(field, 60.0, 1e-3), std::invalid_argument);
}

TEST(Evolution, TrivialPointHasZeroError) {
    auto const spec = SubspaceSpec::vortex(1, 4);
    BranchPoint point;
    point.c = Eigen::VectorXd::Zero(4);
    point.omega = 4.0;
    EXPECT_EQ(periodicity_error(spec, point, 5.0, 1e-3).error, 0.0);
}
