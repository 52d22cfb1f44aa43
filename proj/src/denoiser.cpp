// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dil {

std::string to_string(DenoiserKind kind) {
    switch (kind) {
        case DenoiserKind::gaussian: return "gaussian";
        case DenoiserKind::gmm: return "gmm";
        case DenoiserKind::linear_random: return "linear_random";
        case DenoiserKind::additive: return "additive";
    }
    fail(ErrorCode::config, "unknown denoiser kind");
}

DenoiserKind denoiser_kind_from_string(const std::string& s) {
    if (s == "gaussian") return DenoiserKind::gaussian;
    if (s == "gmm") return DenoiserKind::gmm;
    if (s == "linear_random") return DenoiserKind::linear_random;
    if (s == "additive") return DenoiserKind::additive;
    fail(ErrorCode::config, "unknown denoiser kind '" + s + "'");
}

namespace {

// Additive-family values are snapped to a 2^-26 grid. Sums f(x,t) + g(c) of
// grid values of this magnitude are exact in double, which makes condition
// differences independent of x at the bit level, not just analytically.
constexpr double kGrid = 67108864.0;  // 2^26

double quantize(double v) { return std::nearbyint(v * kGrid) / kGrid; }

Vec quantize(Vec v) {
    for (auto& x : v) x = quantize(x);
    return v;
}

Vec seeded_unit_vector(std::uint64_t seed, Stream stream, std::uint64_t index, int dim) {
    Prng prng = Prng::substream(seed, stream, index);
    return prng.normal_vector(static_cast<std::size_t>(dim));
}

// Row-major dim x dim matrix with iid N(0, 1/dim) entries.
std::vector<double> seeded_matrix(std::uint64_t seed, std::uint64_t index, int dim) {
    Prng prng = Prng::substream(seed, Stream::denoiser_matrix, index);
    std::vector<double> m(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (auto& v : m) v = scale * prng.next_normal();
    return m;
}

Vec matvec(const std::vector<double>& m, const Vec& x) {
    const std::size_t n = x.size();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* row = m.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace

Denoiser Denoiser::gaussian(int dim, int T, std::vector<ConditionParams> conditions) {
    Denoiser out;
    out.kind_ = DenoiserKind::gaussian;
    out.dim_ = dim;
    out.T_ = T;
    for (auto& c : conditions) {
        if (c.components.size() != 1) {
            fail(ErrorCode::config, "gaussian denoiser: condition " + std::to_string(c.condition.id) +
                                        " must have exactly one component");
        }
        c.components[0].weight = 1.0;
        out.conditions_.emplace(c.condition.id, std::move(c));
    }
    out.validate();
    return out;
}

Denoiser Denoiser::gmm(int dim, int T, std::vector<ConditionParams> conditions) {
    Denoiser out;
    out.kind_ = DenoiserKind::gmm;
    out.dim_ = dim;
    out.T_ = T;
    for (auto& c : conditions) out.conditions_.emplace(c.condition.id, std::move(c));
    out.validate();
    return out;
}

Denoiser Denoiser::linear_random(int dim, int T, std::uint64_t seed, std::vector<Condition> conditions) {
    Denoiser out;
    out.kind_ = DenoiserKind::linear_random;
    out.dim_ = dim;
    out.T_ = T;
    out.seed_ = seed;
    for (auto& c : conditions) {
        ConditionParams params;
        params.condition = std::move(c);
        out.conditions_.emplace(params.condition.id, std::move(params));
    }
    out.validate();
    return out;
}

Denoiser Denoiser::additive(int dim, int T, std::uint64_t seed, std::vector<ConditionParams> conditions) {
    Denoiser out;
    out.kind_ = DenoiserKind::additive;
    out.dim_ = dim;
    out.T_ = T;
    out.seed_ = seed;
    for (auto& c : conditions) {
        if (c.offset) {
            check_dim(*c.offset, static_cast<std::size_t>(dim), "additive offset");
            c.offset = quantize(std::move(*c.offset));
        }
        out.conditions_.emplace(c.condition.id, std::move(c));
    }
    out.validate();
    return out;
}

void Denoiser::validate() const {
    if (dim_ < 1) fail(ErrorCode::config, "denoiser: dim must be >= 1");
    if (T_ < 1) fail(ErrorCode::config, "denoiser: T must be >= 1");
    if (conditions_.empty()) fail(ErrorCode::config, "denoiser: needs at least one condition");

    int null_count = 0;
    for (const auto& [id, params] : conditions_) {
        if (params.condition.id != id) fail(ErrorCode::config, "denoiser: condition id mismatch");
        if (params.condition.is_null) ++null_count;
        if (params.condition.embedding) {
            check_dim(*params.condition.embedding, static_cast<std::size_t>(dim_), "condition embedding");
        }
        if (kind_ == DenoiserKind::gaussian || kind_ == DenoiserKind::gmm) {
            if (params.components.empty()) {
                fail(ErrorCode::config, "denoiser: condition " + std::to_string(id) + " has no components");
            }
            double wsum = 0.0;
            for (const auto& comp : params.components) {
                if (!(comp.scale > 0.0)) fail(ErrorCode::config, "denoiser: component scale must be positive");
                if (comp.weight < 0.0) fail(ErrorCode::config, "denoiser: component weight must be nonnegative");
                check_dim(comp.mean, static_cast<std::size_t>(dim_), "component mean");
                wsum += comp.weight;
            }
            if (std::abs(wsum - 1.0) > 1e-9) {
                fail(ErrorCode::config, "denoiser: component weights of condition " + std::to_string(id) +
                                            " sum to " + std::to_string(wsum) + ", expected 1");
            }
        }
    }
    if (null_count != 1) {
        fail(ErrorCode::config, "denoiser: exactly one null condition required, found " + std::to_string(null_count));
    }
}

const ConditionParams& Denoiser::params(const Condition& c) const {
    auto it = conditions_.find(c.id);
    if (it == conditions_.end()) {
        fail(ErrorCode::lookup, "unknown condition id " + std::to_string(c.id));
    }
    if (c.embedding) {
        check_dim(*c.embedding, static_cast<std::size_t>(dim_), "condition embedding");
    }
    return it->second;
}

const Condition& Denoiser::condition(int id) const {
    auto it = conditions_.find(id);
    if (it == conditions_.end()) fail(ErrorCode::lookup, "unknown condition id " + std::to_string(id));
    return it->second.condition;
}

const Condition& Denoiser::null_condition() const {
    for (const auto& [id, params] : conditions_) {
        if (params.condition.is_null) return params.condition;
    }
    fail(ErrorCode::lookup, "denoiser has no null condition");
}

bool Denoiser::has_condition(int id) const { return conditions_.count(id) != 0; }

std::vector<int> Denoiser::condition_ids() const {
    std::vector<int> out;
    out.reserve(conditions_.size());
    for (const auto& [id, params] : conditions_) out.push_back(id);
    return out;
}

Vec Denoiser::condition_offset(const Condition& c) const {
    const ConditionParams& p = params(c);
    switch (kind_) {
        case DenoiserKind::linear_random:
            return seeded_unit_vector(seed_, Stream::denoiser_cond, static_cast<std::uint64_t>(c.id) + 1, dim_);
        case DenoiserKind::additive:
            if (p.offset) return *p.offset;
            return quantize(seeded_unit_vector(seed_, Stream::denoiser_cond, static_cast<std::uint64_t>(c.id) + 1, dim_));
        default:
            fail(ErrorCode::config, "condition_offset: denoiser family has no additive offset");
    }
}

Vec Denoiser::eps(const NoiseSchedule& schedule, const Vec& x, int t, const Condition& c) const {
    check_dim(x, static_cast<std::size_t>(dim_), "eps input");
    const ConditionParams& p = params(c);
    const double abar = schedule.alpha_bar(t);
    const double croot = std::sqrt(abar);
    const double droot = std::sqrt(1.0 - abar);
    eps_calls_.fetch_add(1, std::memory_order_relaxed);

    switch (kind_) {
        case DenoiserKind::gaussian: {
            const GmmComponent& comp = p.components[0];
            const double var = abar * comp.scale * comp.scale + (1.0 - abar);
            Vec out(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                out[i] = droot * (x[i] - croot * comp.mean[i]) / var;
            }
            return out;
        }
        case DenoiserKind::gmm: {
            // Posterior responsibilities of the noised mixture, in log space.
            const std::size_t n = p.components.size();
            std::vector<double> logr(n);
            double logr_max = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                const GmmComponent& comp = p.components[j];
                const double var = abar * comp.scale * comp.scale + (1.0 - abar);
                double sq = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double dxi = x[i] - croot * comp.mean[i];
                    sq += dxi * dxi;
                }
                logr[j] = std::log(comp.weight) - 0.5 * (static_cast<double>(dim_) * std::log(var) + sq / var);
                logr_max = std::max(logr_max, logr[j]);
            }
            double total = 0.0;
            for (auto& lr : logr) {
                lr = std::exp(lr - logr_max);
                total += lr;
            }
            Vec out(x.size(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const GmmComponent& comp = p.components[j];
                const double var = abar * comp.scale * comp.scale + (1.0 - abar);
                const double resp = logr[j] / total;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    out[i] += resp * droot * (x[i] - croot * comp.mean[i]) / var;
                }
            }
            return out;
        }
        case DenoiserKind::linear_random: {
            const auto A = seeded_matrix(seed_, static_cast<std::uint64_t>(t), dim_);
            Vec out = matvec(A, x);
            const Vec g = seeded_unit_vector(seed_, Stream::denoiser_cond, static_cast<std::uint64_t>(c.id) + 1, dim_);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
            return out;
        }
        case DenoiserKind::additive: {
            const auto M = seeded_matrix(seed_, 0, dim_);
            const Vec u = seeded_unit_vector(seed_, Stream::denoiser_aux, 0, dim_);
            const double phase = std::sin(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(T_));
            Vec f = matvec(M, x);
            for (std::size_t i = 0; i < f.size(); ++i) {
                f[i] = quantize(std::tanh(f[i]) + phase * u[i]);
            }
            const Vec g = condition_offset(c);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
            return f;
        }
    }
    fail(ErrorCode::config, "unreachable denoiser kind");
}

Vec Denoiser::posterior_x0(const NoiseSchedule& schedule, const Vec& x, int t, const Condition& c) const {
    const double abar = schedule.alpha_bar(t);
    const double croot = std::sqrt(abar);
    const double droot = std::sqrt(1.0 - abar);
    Vec e = eps(schedule, x, t, c);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - droot * e[i]) / croot;
    return out;
}

double Denoiser::log_density_x0(const Vec& x, const Condition& c) const {
    check_dim(x, static_cast<std::size_t>(dim_), "log_density input");
    if (kind_ != DenoiserKind::gaussian && kind_ != DenoiserKind::gmm) {
        fail(ErrorCode::undefined, "log_density_x0: only gaussian/gmm conditions carry a data law");
    }
    const ConditionParams& p = params(c);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(p.components.size());
    for (const auto& comp : p.components) {
        const double var = comp.scale * comp.scale;
        double sq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dxi = x[i] - comp.mean[i];
            sq += dxi * dxi;
        }
        const double logp = std::log(comp.weight) -
                            0.5 * (static_cast<double>(dim_) * std::log(2.0 * M_PI * var) + sq / var);
        terms.push_back(logp);
        best = std::max(best, logp);
    }
    double total = 0.0;
    for (double lt : terms) total += std::exp(lt - best);
    return best + std::log(total);
}

Vec Denoiser::sample_x0(const Condition& c, Prng& prng) const {
    if (kind_ != DenoiserKind::gaussian && kind_ != DenoiserKind::gmm) {
        fail(ErrorCode::undefined, "sample_x0: only gaussian/gmm conditions carry a data law");
    }
    const ConditionParams& p = params(c);
    std::size_t pick = 0;
    if (p.components.size() > 1) {
        const double u = prng.next_open_unit();
        double acc = 0.0;
        for (std::size_t j = 0; j < p.components.size(); ++j) {
            acc += p.components[j].weight;
            if (u <= acc) {
                pick = j;
                break;
            }
            pick = j;
        }
    }
    const GmmComponent& comp = p.components[pick];
    Vec out(static_cast<std::size_t>(dim_));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = comp.mean[i] + comp.scale * prng.next_normal();
    }
    return out;
}

}  // namespace dil
