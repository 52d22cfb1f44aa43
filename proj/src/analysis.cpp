// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "dil/rng.hpp"
#include "dil/sampler.hpp"

namespace dil {

namespace {

Vec draw_x0(const Denoiser& denoiser, const DataSampler& sampler, std::uint64_t trial_seed) {
    if (sampler.kind == DataSampler::Kind::constant) {
        check_dim(sampler.value, static_cast<std::size_t>(denoiser.dim()), "constant sampler value");
        return sampler.value;
    }
    Prng prng = Prng::substream(trial_seed, Stream::data, 0);
    return denoiser.sample_x0(denoiser.condition(sampler.condition_id), prng);
}

Vec noised(const NoiseSchedule& schedule, const Vec& x0, int t, std::uint64_t seed, bool zero_noise) {
    if (t == 0) return x0;
    if (zero_noise) {
        Vec zeros(x0.size(), 0.0);
        return forward_noise(schedule, x0, t, zeros);
    }
    Prng prng = Prng::substream(seed, Stream::forward_noise, static_cast<std::uint64_t>(t));
    Vec eps_tilde = prng.normal_vector(x0.size());
    return forward_noise(schedule, x0, t, eps_tilde);
}

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    if (values.empty()) return 0.0;
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

std::vector<CurvePoint> correction_std_curve(const NoiseSchedule& schedule,
                                             const Denoiser& denoiser,
                                             const TimestepPlan& plan,
                                             const DataSampler& sampler,
                                             const CurveOptions& options) {
    if (options.N < 100) {
        fail(ErrorCode::config, "correction_std_curve: N must be >= 100, got " + std::to_string(options.N));
    }
    const Condition& c = denoiser.condition(options.source_condition);
    const std::size_t K = plan.steps.size();
    const std::size_t dim = static_cast<std::size_t>(denoiser.dim());

    // Per-component variance across seeds (Welford), pooled over components.
    std::vector<Vec> mean(K, Vec(dim, 0.0));
    std::vector<Vec> m2(K, Vec(dim, 0.0));
    for (int n = 0; n < options.N; ++n) {
        const std::uint64_t trial_seed = derive_seed(options.seed, static_cast<std::uint64_t>(n));
        const Vec x0 = draw_x0(denoiser, sampler, trial_seed);
        for (std::size_t k = 0; k < K; ++k) {
            const int t = plan.steps[k];
            const int s = plan.targets[k];
            const Vec x_t = noised(schedule, x0, t, trial_seed, options.zero_forward_noise);
            const Vec x_s = noised(schedule, x0, s, trial_seed, options.zero_forward_noise);
            const Vec v = sub(x_s, mu(schedule, denoiser, x_t, t, s, c, plan.delta));
            for (std::size_t i = 0; i < dim; ++i) {
                const double delta = v[i] - mean[k][i];
                mean[k][i] += delta / static_cast<double>(n + 1);
                m2[k][i] += delta * (v[i] - mean[k][i]);
            }
        }
    }

    const double count = static_cast<double>(options.N) * static_cast<double>(dim);
    std::vector<CurvePoint> curve(K);
    for (std::size_t k = 0; k < K; ++k) {
        CurvePoint& p = curve[k];
        p.t = plan.steps[k];
        p.s = plan.targets[k];
        double pooled_var = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            pooled_var += m2[k][i] / static_cast<double>(options.N - 1);
        }
        p.measured_std = std::sqrt(pooled_var / static_cast<double>(dim));
        p.expected_sigma = coefficients(schedule, p.t, p.s).sigma;
        // 68% band of a std pooled over N * dim gaussian draws: std / sqrt(2M).
        p.ci_half = p.measured_std / std::sqrt(2.0 * count);
    }
    return curve;
}

OffsetHistogram offset_histogram(const NoiseSchedule& schedule,
                                 const std::vector<CurvePoint>& curve,
                                 const OffsetOptions& options) {
    if (curve.empty()) fail(ErrorCode::config, "offset_histogram: empty curve table");

    OffsetHistogram out;
    std::vector<double> offsets;
    for (const CurvePoint& p : curve) {
        const int stride = (options.stride == OffsetOptions::Stride::adjacent) ? 1 : (p.t - p.s);
        if (stride < 1) fail(ErrorCode::config, "offset_histogram: nonpositive stride in curve row");
        int best_t = -1;
        double best_diff = 0.0;
        for (int cand = std::max(stride, 1); cand <= schedule.T() - 1; ++cand) {
            const double sigma = coefficients(schedule, cand, cand - stride).sigma;
            const double diff = std::abs(p.measured_std - sigma);
            if (best_t < 0 || diff < best_diff) {
                best_t = cand;
                best_diff = diff;
            }
        }
        OffsetRow row;
        row.t = p.t;
        row.t_star = best_t;
        row.offset = best_t - p.t;
        out.rows.push_back(row);
        offsets.push_back(static_cast<double>(row.offset));
    }
    out.median_offset = percentile(offsets, 0.5);
    out.iqr_low = percentile(offsets, 0.25);
    out.iqr_high = percentile(offsets, 0.75);
    return out;
}

CosinePair cosine_diagnostics(const NoiseSchedule& schedule, const Denoiser& denoiser,
                              const RecordStep& step, const Vec& xhat_t,
                              const Condition& c, const Condition& c_hat,
                              const Condition& phi, int delta) {
    const Vec mu_hat_c = mu(schedule, denoiser, xhat_t, step.t, step.s, c, delta);
    const Vec mu_src_c = mu(schedule, denoiser, step.x_t, step.t, step.s, c, delta);
    const Vec mu_hat_phi = mu(schedule, denoiser, xhat_t, step.t, step.s, phi, delta);
    const Vec mu_src_phi = mu(schedule, denoiser, step.x_t, step.t, step.s, phi, delta);
    const Vec mu_hat_tgt = mu(schedule, denoiser, xhat_t, step.t, step.s, c_hat, delta);

    const Vec traj_c = sub(mu_hat_c, mu_src_c);
    const Vec traj_phi = sub(mu_hat_phi, mu_src_phi);
    const Vec cross_prompt = sub(mu_hat_tgt, mu_hat_c);

    const double n_c = norm2(traj_c);
    const double n_phi = norm2(traj_phi);
    const double n_cp = norm2(cross_prompt);
    if (n_c == 0.0 || n_phi == 0.0 || n_cp == 0.0) {
        fail(ErrorCode::undefined, "cosine_diagnostics: zero-norm direction at t=" + std::to_string(step.t));
    }

    CosinePair out;
    out.cos_a = dot(traj_c, traj_phi) / (n_c * n_phi);
    out.cos_b = 0.5 * (dot(traj_c, cross_prompt) / (n_c * n_cp) + dot(traj_phi, cross_prompt) / (n_phi * n_cp));
    return out;
}

}  // namespace dil
