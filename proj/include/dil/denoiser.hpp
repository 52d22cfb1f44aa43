// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dil/rng.hpp"
#include "dil/schedule.hpp"
#include "dil/vecmath.hpp"

namespace dil {

/// Abstract conditioning signal. Conditions are labels (optionally with an
/// embedding vector); a single condition per denoiser is flagged as the null
/// condition used by classifier-free guidance.
struct Condition {
    int id = 0;
    bool is_null = false;
    std::optional<Vec> embedding;
};

enum class DenoiserKind { gaussian, gmm, linear_random, additive };

std::string to_string(DenoiserKind kind);
DenoiserKind denoiser_kind_from_string(const std::string& s);

struct GmmComponent {
    double weight = 1.0;
    Vec mean;
    double scale = 1.0;
};

struct ConditionParams {
    Condition condition;
    std::vector<GmmComponent> components;  // gaussian uses exactly one
    std::optional<Vec> offset;             // additive only; generated from seed when absent
};

/// Closed-form conditional noise predictor eps(x, t, c). Four families:
///   gaussian      Bayes-optimal prediction for x0 ~ N(m_c, s_c^2 I)
///   gmm           responsibility-weighted mixture of gaussian predictions
///   linear_random seeded per-timestep matrix A_t x + g(c)
///   additive      shared nonlinear map f(x, t) + per-condition offset g(c)
/// All instances are deterministic functions of their JSON spec; the spec's
/// content hash is what inversion records embed for replay integrity.
class Denoiser {
public:
    static Denoiser gaussian(int dim, int T, std::vector<ConditionParams> conditions);
    static Denoiser gmm(int dim, int T, std::vector<ConditionParams> conditions);
    static Denoiser linear_random(int dim, int T, std::uint64_t seed, std::vector<Condition> conditions);
    static Denoiser additive(int dim, int T, std::uint64_t seed, std::vector<ConditionParams> conditions);

    Denoiser(const Denoiser& other)
        : kind_(other.kind_), dim_(other.dim_), T_(other.T_), seed_(other.seed_),
          conditions_(other.conditions_), eps_calls_(other.eps_call_count()) {}
    Denoiser& operator=(const Denoiser& other) {
        kind_ = other.kind_;
        dim_ = other.dim_;
        T_ = other.T_;
        seed_ = other.seed_;
        conditions_ = other.conditions_;
        eps_calls_.store(other.eps_call_count(), std::memory_order_relaxed);
        return *this;
    }

    DenoiserKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int T() const { return T_; }
    std::uint64_t seed() const { return seed_; }

    Vec eps(const NoiseSchedule& schedule, const Vec& x, int t, const Condition& c) const;
    Vec posterior_x0(const NoiseSchedule& schedule, const Vec& x, int t, const Condition& c) const;

    // Log density of the condition's clean-data law (gaussian/gmm only).
    double log_density_x0(const Vec& x, const Condition& c) const;
    Vec sample_x0(const Condition& c, Prng& prng) const;

    const Condition& condition(int id) const;
    const Condition& null_condition() const;
    bool has_condition(int id) const;
    std::vector<int> condition_ids() const;

    // Additive family: the exact condition offset g(c). Differences of these
    // are bitwise independent of x, which the guidance-residual diagnostics
    // rely on.
    Vec condition_offset(const Condition& c) const;

    std::uint64_t eps_call_count() const { return eps_calls_.load(std::memory_order_relaxed); }
    void reset_eps_call_count() const { eps_calls_.store(0, std::memory_order_relaxed); }

    const std::map<int, ConditionParams>& condition_params() const { return conditions_; }

private:
    Denoiser() = default;
    void validate() const;
    const ConditionParams& params(const Condition& c) const;

    DenoiserKind kind_ = DenoiserKind::gaussian;
    int dim_ = 0;
    int T_ = 0;
    std::uint64_t seed_ = 0;
    std::map<int, ConditionParams> conditions_;
    mutable std::atomic<std::uint64_t> eps_calls_{0};
};

}  // namespace dil
