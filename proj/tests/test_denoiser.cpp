// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/denoiser.hpp"

#include <cmath>

#include "dil/rng.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace dil;
using namespace dil::testing;

namespace {

// alpha_bar(1) = 0.64 on this table.
NoiseSchedule abar064_schedule() { return NoiseSchedule::build({ScheduleKind::constant, 0.36, 0.36, 4}); }

}  // namespace

TEST_CASE("unit gaussian prediction is 0.6 x at alpha_bar = 0.64") {
    const NoiseSchedule s = abar064_schedule();
    const Denoiser den = matched_unit_denoiser(3, 4);
    const Vec x{1.0, -2.0, 0.5};
    const Vec e = den.eps(s, x, 1, den.condition(0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(e[i] == doctest::Approx(0.6 * x[i]).epsilon(1e-14));
    }
}

TEST_CASE("unit gaussian prediction slope cross-checks against Monte-Carlo regression") {
    // Draw (x0, eps) pairs, noise them to alpha_bar = 0.64, and regress the
    // injected noise on the observed state: the slope estimates the posterior
    // coefficient 0.6 independently of the closed form.
    const double abar = 0.64;
    Prng prng = Prng::substream(2024, Stream::data, 0);
    const int n = 100000;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x0 = prng.next_normal();
        const double eps = prng.next_normal();
        const double xt = std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
        sxy += xt * eps;
        sxx += xt * xt;
    }
    CHECK(sxy / sxx == doctest::Approx(0.6).epsilon(1e-2 / 0.6));
}

TEST_CASE("gaussian prediction vanishes at the posterior mode of a noiseless input") {
    const NoiseSchedule s = sd_schedule();
    const Vec mean{2.0, -1.0, 0.25, 4.0};
    const Denoiser den = Denoiser::gaussian(
        4, 1000, {gauss_cond(0, false, mean, 0.7), gauss_cond(1, true, Vec(4, 0.0), 1.0)});
    const int t = 321;
    Vec x(mean.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sqrt(s.alpha_bar(t)) * mean[i];
    const Vec e = den.eps(s, x, t, den.condition(0));
    for (double v : e) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("single-component gmm equals the gaussian variant") {
    const NoiseSchedule s = sd_schedule();
    const Vec mean{1.0, -0.5};
    const Denoiser gauss = Denoiser::gaussian(
        2, 1000, {gauss_cond(0, false, mean, 0.6), gauss_cond(1, true, Vec(2, 0.0), 1.0)});
    const Denoiser mixture = Denoiser::gmm(
        2, 1000, {gauss_cond(0, false, mean, 0.6), gauss_cond(1, true, Vec(2, 0.0), 1.0)});
    Prng prng = Prng::substream(5, Stream::data, 0);
    for (int i = 0; i < 100; ++i) {
        const Vec x = prng.normal_vector(2);
        const int t = 1 + static_cast<int>(prng.next_u64() % 999);
        const Vec a = gauss.eps(s, x, t, gauss.condition(0));
        const Vec b = mixture.eps(s, x, t, mixture.condition(0));
        for (std::size_t j = 0; j < x.size(); ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-13));
    }
}

TEST_CASE("posterior_x0 of the unit gaussian reduces to sqrt(alpha_bar) x") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = matched_unit_denoiser(4);
    Prng prng = Prng::substream(6, Stream::data, 0);
    const Vec x = prng.normal_vector(4);
    const int t = 437;
    const Vec xhat = den.posterior_x0(s, x, t, den.condition(0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(xhat[i] == doctest::Approx(std::sqrt(s.alpha_bar(t)) * x[i]).epsilon(1e-12));
    }
}

TEST_CASE("posterior_x0 matches the exact Bayes posterior mean for general gaussians") {
    const NoiseSchedule s = sd_schedule();
    const Vec mean{0.5, -2.0, 1.5};
    const double scale = 0.8;
    const Denoiser den = Denoiser::gaussian(
        3, 1000, {gauss_cond(0, false, mean, scale), gauss_cond(1, true, Vec(3, 0.0), 1.0)});
    Prng prng = Prng::substream(7, Stream::data, 0);
    for (int i = 0; i < 50; ++i) {
        const Vec x = prng.normal_vector(3);
        const int t = 1 + static_cast<int>(prng.next_u64() % 999);
        const double abar = s.alpha_bar(t);
        const Vec xhat = den.posterior_x0(s, x, t, den.condition(0));
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double expected = (std::sqrt(abar) * scale * scale * x[j] + (1.0 - abar) * mean[j]) /
                                    (abar * scale * scale + 1.0 - abar);
            CHECK(xhat[j] == doctest::Approx(expected).epsilon(1e-11));
        }
    }
}

TEST_CASE("posterior_x0 at t = 0 is the identity") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = two_mode_toy(8);
    Prng prng = Prng::substream(8, Stream::data, 0);
    const Vec x = prng.normal_vector(8);
    const Vec xhat = den.posterior_x0(s, x, 0, den.condition(0));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(xhat[i] == x[i]);
}

TEST_CASE("gmm posterior mean stays in the convex hull of component posteriors") {
    const NoiseSchedule s = sd_schedule();
    std::vector<ConditionParams> conds;
    ConditionParams mixture;
    mixture.condition = Condition{0, false, std::nullopt};
    mixture.components.push_back(GmmComponent{0.3, Vec{4.0, 0.0}, 0.5});
    mixture.components.push_back(GmmComponent{0.7, Vec{-4.0, 1.0}, 0.8});
    conds.push_back(mixture);
    conds.push_back(gauss_cond(1, true, Vec(2, 0.0), 1.0));
    const Denoiser den = Denoiser::gmm(2, 1000, std::move(conds));

    const int t = 500;
    const double abar = s.alpha_bar(t);
    const Vec x{50.0, -35.0};  // far from every component
    const Vec xhat = den.posterior_x0(s, x, t, den.condition(0));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::isfinite(xhat[i]));

    // Brute-force responsibilities and per-component posterior means.
    const auto& comps = den.condition_params().at(0).components;
    double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
    for (const auto& comp : comps) {
        for (std::size_t i = 0; i < 2; ++i) {
            const double var = comp.scale * comp.scale;
            const double post =
                (std::sqrt(abar) * var * x[i] + (1.0 - abar) * comp.mean[i]) / (abar * var + 1.0 - abar);
            lo[i] = std::min(lo[i], post);
            hi[i] = std::max(hi[i], post);
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(xhat[i] >= lo[i] - 1e-9);
        CHECK(xhat[i] <= hi[i] + 1e-9);
    }
}

TEST_CASE("bayes residual mse equals alpha_bar and is monotone in it") {
    // Predicting the injected noise from x_t leaves exactly alpha_bar of its
    // variance unexplained for the matched unit gaussian.
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = matched_unit_denoiser(1);
    double previous_mse = 0.0;
    bool first = true;
    for (int t : {900, 600, 300, 100}) {  // alpha_bar increases as t falls
        Prng prng = Prng::substream(42 + t, Stream::data, 0);
        const int n = 100000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x0 = prng.next_normal();
            const double eps = prng.next_normal();
            const Vec xt{std::sqrt(s.alpha_bar(t)) * x0 + std::sqrt(1.0 - s.alpha_bar(t)) * eps};
            const Vec pred = den.eps(s, xt, t, den.condition(0));
            acc += (eps - pred[0]) * (eps - pred[0]);
        }
        const double mse = acc / n;
        CHECK(mse == doctest::Approx(s.alpha_bar(t)).epsilon(0.03));
        if (!first) CHECK(mse > previous_mse);
        previous_mse = mse;
        first = false;
    }
}

TEST_CASE("linear_random is reproducible and timestep dependent") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser a = random_linear_denoiser(6, 99);
    const Denoiser b = random_linear_denoiser(6, 99);
    const Denoiser c = random_linear_denoiser(6, 100);
    Prng prng = Prng::substream(1, Stream::data, 0);
    const Vec x = prng.normal_vector(6);
    const Vec ea = a.eps(s, x, 400, a.condition(0));
    const Vec eb = b.eps(s, x, 400, b.condition(0));
    const Vec ec = c.eps(s, x, 400, c.condition(0));
    const Vec et = a.eps(s, x, 401, a.condition(0));
    CHECK(ea == eb);
    CHECK(ea != ec);
    CHECK(ea != et);
}

TEST_CASE("additive condition differences are independent of the state, bitwise") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = additive_denoiser(5, 31);
    Prng prng = Prng::substream(2, Stream::data, 0);
    for (int i = 0; i < 100; ++i) {
        const Vec x = prng.normal_vector(5);
        const Vec y = prng.normal_vector(5);
        const int t = 1 + static_cast<int>(prng.next_u64() % 999);
        const Vec dx = sub(den.eps(s, x, t, den.condition(0)), den.eps(s, x, t, den.condition(1)));
        const Vec dy = sub(den.eps(s, y, t, den.condition(0)), den.eps(s, y, t, den.condition(1)));
        for (std::size_t j = 0; j < dx.size(); ++j) CHECK(dx[j] == dy[j]);
    }
}

TEST_CASE("additive offsets match the family's condition_offset accessor") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = additive_denoiser(4, 55);
    Prng prng = Prng::substream(3, Stream::data, 0);
    const Vec x = prng.normal_vector(4);
    const Vec diff = sub(den.eps(s, x, 100, den.condition(0)), den.eps(s, x, 100, den.condition(1)));
    const Vec expected = sub(den.condition_offset(den.condition(0)), den.condition_offset(den.condition(1)));
    for (std::size_t j = 0; j < diff.size(); ++j) CHECK(diff[j] == expected[j]);
}

TEST_CASE("identical inputs give identical outputs across variants") {
    const NoiseSchedule s = sd_schedule();
    Prng prng = Prng::substream(4, Stream::data, 0);
    const Vec x = prng.normal_vector(4);
    for (const Denoiser& den : {matched_unit_denoiser(4), two_mode_toy(4), random_linear_denoiser(4, 8),
                                additive_denoiser(4, 8)}) {
        const Vec a = den.eps(s, x, 250, den.condition(0));
        const Vec b = den.eps(s, x, 250, den.condition(0));
        CHECK(a == b);
    }
}

TEST_CASE("condition and shape errors") {
    const NoiseSchedule s = sd_schedule();
    const Denoiser den = matched_unit_denoiser(4);
    Prng prng = Prng::substream(5, Stream::data, 0);
    const Vec x = prng.normal_vector(4);

    try {
        den.eps(s, x, 10, Condition{42, false, std::nullopt});
        FAIL("expected lookup error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::lookup);
    }
    try {
        den.eps(s, Vec{1.0, 2.0}, 10, den.condition(0));
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::shape);
    }
    // Embedding dimension must match the denoiser.
    Condition bad = den.condition(0);
    bad.embedding = Vec{1.0};
    CHECK_THROWS_AS(den.eps(s, x, 10, bad), Error);
}

TEST_CASE("spec validation errors") {
    // Two null conditions.
    CHECK_THROWS_AS(Denoiser::gaussian(2, 10,
                                       {gauss_cond(0, true, Vec(2, 0.0), 1.0),
                                        gauss_cond(1, true, Vec(2, 0.0), 1.0)}),
                    Error);
    // No null condition.
    CHECK_THROWS_AS(Denoiser::gaussian(2, 10, {gauss_cond(0, false, Vec(2, 0.0), 1.0)}), Error);
    // Nonpositive scale.
    CHECK_THROWS_AS(Denoiser::gaussian(2, 10,
                                       {gauss_cond(0, false, Vec(2, 0.0), 0.0),
                                        gauss_cond(1, true, Vec(2, 0.0), 1.0)}),
                    Error);
    // Mixture weights must sum to one.
    ConditionParams bad;
    bad.condition = Condition{0, false, std::nullopt};
    bad.components.push_back(GmmComponent{0.4, Vec(2, 0.0), 1.0});
    bad.components.push_back(GmmComponent{0.4, Vec(2, 1.0), 1.0});
    CHECK_THROWS_AS(Denoiser::gmm(2, 10, {bad, gauss_cond(1, true, Vec(2, 0.0), 1.0)}), Error);
}

TEST_CASE("sample_x0 and log_density follow the condition's data law") {
    const Denoiser den = two_mode_toy(4);
    Prng prng = Prng::substream(77, Stream::data, 0);
    const Vec near_a = den.sample_x0(den.condition(0), prng);
    CHECK(den.log_density_x0(near_a, den.condition(0)) > den.log_density_x0(near_a, den.condition(1)));

    const Denoiser lin = random_linear_denoiser(4, 3);
    CHECK_THROWS_AS(lin.log_density_x0(near_a, lin.condition(0)), Error);
}
