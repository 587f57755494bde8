#include "gpbif/continuation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gpbif;

namespace {

ContinuationConfig with_amplitude(double const a0) {
    ContinuationConfig config;
    config.seed_amplitude = a0;
    return config;
}

} // namespace

TEST(BifurcationPoint, Values) {
    EXPECT_EQ(bifurcation_point(SubspaceKind::Vortex, 0, 0), 2.0);
    EXPECT_EQ(bifurcation_point(SubspaceKind::Vortex, 1, 1), 8.0);
    EXPECT_EQ(bifurcation_point(SubspaceKind::MultiPole, 2, 0), 6.0);
    EXPECT_EQ(bifurcation_point(SubspaceKind::MultiPole, 3, 2), 16.0);
}

TEST(BifurcationPoint, ResonanceGuard) {
    try {
        bifurcation_point(SubspaceKind::MultiPole, 1, 1);
        FAIL() << "expected ResonantCase";
    } catch (ResonantCase const& e) {
        ASSERT_EQ(e.clashes().size(), 1u);
        EXPECT_EQ(e.clashes()[0], (BasisIndex{3, 0}));
        EXPECT_NE(std::string(e.what()).find("(3,0)"), std::string::npos);
    }
    EXPECT_THROW(bifurcation_point(SubspaceKind::MultiPole, 2, 2), ResonantCase);
    EXPECT_NO_THROW(bifurcation_point(SubspaceKind::Vortex, 1, 5));
}

TEST(Seed, RejectsZeroAmplitude) {
    GalerkinSystem const system(SubspaceSpec::vortex(1, 8));
    EXPECT_THROW(seed_branch(system, 0, with_amplitude(0.0)), std::invalid_argument);
    EXPECT_THROW(trace_branch(system, 0, with_amplitude(0.0)), std::invalid_argument);
}

TEST(Seed, OnsetIsQuadraticAndMatchesOracle) {
    for (auto const& [m0, n0] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{2, 1}}) {
        GalerkinSystem const system(SubspaceSpec::vortex(m0, 12));
        double const omega_star = eigenvalue({m0, n0});
        double const d1 = seed_branch(system, n0, with_amplitude(0.02)).omega - omega_star;
        double const d2 = seed_branch(system, n0, with_amplitude(0.01)).omega - omega_star;
        EXPECT_NEAR(d2 / d1, 0.25, 0.25 * 0.15);
        EXPECT_NEAR(d2 / 1e-4, oracle::vortex_onset_slope(m0, n0), 0.05 * oracle::vortex_onset_slope(m0, n0));
    }
}

TEST(Seed, NegatedAmplitudeGivesNegatedState) {
    GalerkinSystem const system(SubspaceSpec::multipole(1, 10, 3));
    auto const plus = seed_branch(system, 0, with_amplitude(0.05));
    auto const minus = seed_branch(system, 0, with_amplitude(-0.05));
    EXPECT_NEAR(plus.omega, minus.omega, 1e-13);
    EXPECT_LT((plus.c + minus.c).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Continuation, BranchIsSupercriticalAndConsistent) {
    GalerkinSystem const system(SubspaceSpec::vortex(1, 12));
    auto const branch = trace_branch(system, 0);
    ASSERT_GE(branch.points.size(), 10u);
    EXPECT_EQ(branch.termination, Termination::ReachedNormMax);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_GE(branch.points[i].omega, branch.omega_star - 1e-8);
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        auto const& p = branch.points[i];
        EXPECT_LE(system.residual(p.c, p.omega).norm(), scaled_residual_bound(p.c));
        if (i > 0) {
            EXPECT_GT(p.arclength, branch.points[i - 1].arclength);
        }
    }
    EXPECT_GT(branch.points.back().c.norm(), 10.0);
}

TEST(Continuation, NegatedSeedTracesNegatedBranch) {
    GalerkinSystem const system(SubspaceSpec::vortex(0, 8));
    auto config = with_amplitude(-1e-2);
    config.norm_max = 2.0;
    auto const minus = trace_branch(system, 0, config);
    config.seed_amplitude = 1e-2;
    auto const plus = trace_branch(system, 0, config);
    ASSERT_EQ(minus.points.size(), plus.points.size());
    for (std::size_t i = 0; i < plus.points.size(); ++i) {
        EXPECT_NEAR(minus.points[i].omega, plus.points[i].omega, 1e-10);
        EXPECT_LT((minus.points[i].c + plus.points[i].c).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Continuation, TerminationReasons) {
    GalerkinSystem const system(SubspaceSpec::multipole(1, 8, 2));
    auto config = ContinuationConfig{};
    config.omega_max = 4.5;
    EXPECT_EQ(trace_branch(system, 0, config).termination, Termination::ReachedOmegaMax);
    config = ContinuationConfig{};
    config.max_points = 5;
    auto const capped = trace_branch(system, 0, config);
    EXPECT_EQ(capped.termination, Termination::MaxPointsReached);
    EXPECT_EQ(capped.points.size(), 5u);
    config = ContinuationConfig{};
    config.min_step = 1e-2;
    config.initial_step = 1e-2;
    config.max_corrector_iterations = 0;
    EXPECT_EQ(trace_branch(system, 0, config).termination, Termination::StepFailure);
}

TEST(Continuation, ConfigValidation) {
    ContinuationConfig config;
    config.initial_step = 1.0;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.shrink = 1.5;
    EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(LocalExpansion, SecondaryExponentsAtLeastTwo) {
    for (auto const& spec : {SubspaceSpec::vortex(1, 12), SubspaceSpec::multipole(1, 12, 3)}) {
        GalerkinSystem const system(spec);
        auto const branch = trace_branch(system, 0);
        auto const fits = fit_local_expansion(branch, first_decade_count(branch));
        ASSERT_EQ(fits.size(), static_cast<std::size_t>(spec.dimension()));
        EXPECT_NEAR(fits[0].slope, 1.0, 1e-12);
        for (std::size_t i = 1; i < fits.size(); ++i) EXPECT_GE(fits[i].slope, 2.0) << fits[i].mode.m << "," << fits[i].mode.n;
        // cubic forcing: the nearest modes scale like a^3
        EXPECT_NEAR(fits[1].slope, 3.0, 0.05);
    }
}

TEST(LocalExpansion, InsufficientRange) {
    GalerkinSystem const system(SubspaceSpec::vortex(1, 8));
    auto config = ContinuationConfig{};
    config.max_points = 8;
    config.max_step = config.initial_step = 1e-3;
    config.grow = 1.0001;
    auto const short_branch = trace_branch(system, 0, config);
    EXPECT_THROW(fit_local_expansion(short_branch, 8), InsufficientRange);
    EXPECT_THROW(fit_local_expansion(short_branch, 5), InsufficientRange);
}
