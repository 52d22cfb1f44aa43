// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/dds.hpp"

#include <cmath>

#include "dil/editing.hpp"
#include "dil/inversion.hpp"
#include "dil/rng.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace dil;
using namespace dil::testing;

TEST_CASE("the gradient vanishes when nothing changed") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = random_linear_denoiser(4, 3);
    Prng prng = Prng::substream(60, Stream::data, 0);
    const Vec x0 = prng.normal_vector(4);
    const Vec eps_tilde = prng.normal_vector(4);
    const Vec grad = dds_gradient(s, den, x0, x0, 321, den.condition(0), den.condition(0), eps_tilde);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("additive family: the unchanged-image gradient is the offset difference") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = additive_denoiser(5, 44);
    Prng prng = Prng::substream(61, Stream::data, 0);
    const Vec x0 = prng.normal_vector(5);
    const Vec eps_tilde = prng.normal_vector(5);
    const Vec grad = dds_gradient(s, den, x0, x0, 200, den.condition(0), den.condition(1), eps_tilde);
    const Vec expect = sub(den.condition_offset(den.condition(1)), den.condition_offset(den.condition(0)));
    CHECK(grad == expect);
}

TEST_CASE("the gradient matches a direct two-call evaluation") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = random_linear_denoiser(6, 77);
    Prng prng = Prng::substream(62, Stream::data, 0);
    const Vec x0 = prng.normal_vector(6);
    const Vec xhat0 = prng.normal_vector(6);
    const Vec eps_tilde = prng.normal_vector(6);
    const int t = 432;

    const Vec grad = dds_gradient(s, den, xhat0, x0, t, den.condition(0), den.condition(1), eps_tilde);
    const Vec x_t = forward_noise(s, x0, t, eps_tilde);
    const Vec xhat_t = forward_noise(s, xhat0, t, eps_tilde);
    const Vec direct = sub(den.eps(s, xhat_t, t, den.condition(1)), den.eps(s, x_t, t, den.condition(0)));
    CHECK(grad == direct);
}

TEST_CASE("the source condition is a fixed point at any learning rate") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = random_linear_denoiser(4, 5);
    const TimestepPlan plan = make_uniform_plan(s, 5, 700, 0);
    Prng prng = Prng::substream(63, Stream::data, 0);
    const Vec x0 = prng.normal_vector(4);
    for (LrMode mode : {LrMode::eq_lr, LrMode::constant}) {
        const DdsRun run = dds_edit(s, den, plan, x0, den.condition(0), den.condition(0), mode, 0.37, 99);
        for (const Vec& it : run.iterates) CHECK(it == x0);
    }
}

TEST_CASE("coefficient identity: the carry through a step equals the target scale") {
    for (const auto& config : {ScheduleConfig{ScheduleKind::linear, 0.0001, 0.02, 500},
                               ScheduleConfig{ScheduleKind::scaled_linear, 0.00085, 0.012, 1000},
                               ScheduleConfig{ScheduleKind::constant, 0.05, 0.05, 200}}) {
        const NoiseSchedule s = NoiseSchedule::build(config);
        for (int t = 2; t <= s.T() - 1; ++t) {
            // 1 / (c_t a_t) == 1 / c_{t-1}, i.e. a * c == sqrt(alpha_bar(t-1)).
            const StepCoefficients k = coefficients(s, t, t - 1);
            const double lhs = k.a * k.c;
            const double rhs = std::sqrt(s.alpha_bar(t - 1));
            CHECK(std::abs(lhs - rhs) / rhs <= 1e-12);
        }
        // Strided version used by the strided learning rate.
        const StepCoefficients k = coefficients(s, s.T() - 1, (s.T() - 1) / 3);
        CHECK(k.a * k.c == doctest::Approx(std::sqrt(s.alpha_bar((s.T() - 1) / 3))).epsilon(1e-12));
    }
}

TEST_CASE("sequential steps with the exact learning rate reproduce edit-friendly editing") {
    const NoiseSchedule s = sd_schedule();
    const auto configs = make_equiv_configs(s, 10, 31415);
    const auto rows = ef_dds_equivalence_report(s, configs, LrMode::eq_lr);
    for (const auto& row : rows) {
        CAPTURE(row.dim);
        CAPTURE(row.K);
        CHECK(row.max_abs_diff <= 1e-9);
    }
}

TEST_CASE("a wrong constant learning rate breaks the equivalence") {
    const NoiseSchedule s = sd_schedule();
    const auto configs = make_equiv_configs(s, 10, 31415);
    const auto rows = ef_dds_equivalence_report(s, configs, LrMode::constant);
    int broken = 0;
    for (const auto& row : rows) broken += row.max_abs_diff > 1e-3;
    CHECK(broken >= 9);
}

TEST_CASE("the evaluation-time shift falls outside the equivalence") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = random_linear_denoiser(4, 8);
    const TimestepPlan shifted = make_uniform_plan(s, 4, 599, 200);
    Prng prng = Prng::substream(64, Stream::data, 0);
    const Vec x0 = prng.normal_vector(4);
    const std::uint64_t seed = 2718;

    const InversionRecord record = invert(s, den, shifted, x0, den.condition(0), seed);
    EditConfig config;
    config.mode = EditMode::ef;
    const Vec ef_final = edit(s, den, record, den.condition(1), config).final_state();
    const Vec dds_final =
        dds_edit(s, den, shifted, x0, den.condition(0), den.condition(1), LrMode::eq_lr, 0.0, seed)
            .final_iterate();
    CHECK(max_abs_diff(ef_final, dds_final) > 1e-3);
}

TEST_CASE("small hand-checkable setup: vanishing prediction, dim 2, K 3") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = near_zero_denoiser(2);
    const TimestepPlan plan = make_uniform_plan(s, 3, 600, 0);
    const Vec x0{0.4, -1.1};
    const std::uint64_t seed = 13;

    const InversionRecord record = invert(s, den, plan, x0, den.condition(0), seed);
    EditConfig config;
    config.mode = EditMode::ef;
    const Vec ef_final = edit(s, den, record, den.condition(1), config).final_state();
    const DdsRun run = dds_edit(s, den, plan, x0, den.condition(0), den.condition(1), LrMode::eq_lr, 0.0, seed);
    CHECK(max_abs_diff(ef_final, run.final_iterate()) <= 1e-12);
    // With eps ~ 0 both conditions predict the same noise, so nothing moves.
    CHECK(max_abs_diff(run.final_iterate(), x0) <= 1e-9);
    REQUIRE(run.gammas.size() == 3);
    for (std::size_t k = 0; k < run.gammas.size(); ++k) {
        const StepCoefficients coeff = coefficients(s, plan.steps[k], plan.targets[k]);
        CHECK(run.gammas[k] == doctest::Approx(coeff.b / coeff.c).epsilon(1e-15));
    }
}

TEST_CASE("dds argument validation") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = random_linear_denoiser(3, 1);
    const TimestepPlan plan = make_uniform_plan(s, 2, 400, 0);
    CHECK_THROWS_AS(dds_edit(s, den, plan, Vec{1.0}, den.condition(0), den.condition(1), LrMode::eq_lr, 0.0, 1),
                    Error);
    CHECK_THROWS_AS(
        dds_edit(s, den, plan, Vec{1.0, 2.0, 3.0}, den.condition(0), den.condition(1), LrMode::constant, 0.0, 1),
        Error);
}
