// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace dil {

namespace {

void dump_value(const json& j, std::string& out, int indent, int depth);

void append_indent(std::string& out, int indent, int depth) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void dump_number(const json& j, std::string& out) {
    if (j.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
        out += buf;
    } else if (j.is_number_unsigned()) {
        out += std::to_string(j.get<std::uint64_t>());
    } else {
        out += std::to_string(j.get<std::int64_t>());
    }
}

void dump_value(const json& j, std::string& out, int indent, int depth) {
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out.push_back('{');
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                append_indent(out, indent, depth + 1);
                out += json(it.key()).dump();
                out.push_back(':');
                if (indent >= 0) out.push_back(' ');
                dump_value(it.value(), out, indent, depth + 1);
            }
            append_indent(out, indent, depth);
            out.push_back('}');
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out.push_back('[');
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) out.push_back(',');
                dump_value(j[i], out, -1, 0);  // arrays stay on one line
            }
            out.push_back(']');
            return;
        }
        case json::value_t::string:
            out += j.dump();
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::null:
            out += "null";
            return;
        default:
            dump_number(j, out);
            return;
    }
}

// --- config access with field-path diagnostics ---

const json& req(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) {
        fail(ErrorCode::config, "config error at " + path + "." + key + ": missing field");
    }
    return j.at(key);
}

double req_double(const json& j, const char* key, const std::string& path) {
    const json& v = req(j, key, path);
    if (!v.is_number()) fail(ErrorCode::config, "config error at " + path + "." + key + ": expected a number");
    return v.get<double>();
}

int req_int(const json& j, const char* key, const std::string& path) {
    const json& v = req(j, key, path);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        fail(ErrorCode::config, "config error at " + path + "." + key + ": expected an integer");
    }
    return v.get<int>();
}

std::string req_string(const json& j, const char* key, const std::string& path) {
    const json& v = req(j, key, path);
    if (!v.is_string()) fail(ErrorCode::config, "config error at " + path + "." + key + ": expected a string");
    return v.get<std::string>();
}

Vec req_vec(const json& j, const char* key, const std::string& path) {
    const json& v = req(j, key, path);
    if (!v.is_array()) fail(ErrorCode::config, "config error at " + path + "." + key + ": expected an array");
    Vec out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) fail(ErrorCode::config, "config error at " + path + "." + key + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

json vec_to_json(const Vec& v) { return json(v); }

}  // namespace

std::string canonical_dump(const json& j, int indent) {
    std::string out;
    dump_value(j, out, indent, 0);
    if (indent >= 0) out.push_back('\n');
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hash_hex(const json& j) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(canonical_dump(j)));
    return buf;
}

json schedule_config_to_json(const ScheduleConfig& config) {
    return json{{"kind", to_string(config.kind)},
                {"beta_start", config.beta_start},
                {"beta_end", config.beta_end},
                {"T", config.T}};
}

ScheduleConfig schedule_config_from_json(const json& j) {
    ScheduleConfig config;
    config.kind = schedule_kind_from_string(req_string(j, "kind", "schedule"));
    config.beta_start = req_double(j, "beta_start", "schedule");
    config.beta_end = req_double(j, "beta_end", "schedule");
    config.T = req_int(j, "T", "schedule");
    return config;
}

std::string schedule_hash(const NoiseSchedule& schedule) {
    return hash_hex(schedule_config_to_json(schedule.config()));
}

std::string schedule_table_csv(const NoiseSchedule& schedule) {
    std::string out = "t,beta,alpha,alpha_bar\n";
    char buf[128];
    for (int t = 1; t <= schedule.T(); ++t) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", t, schedule.beta(t), schedule.alpha(t),
                      schedule.alpha_bar(t));
        out += buf;
    }
    return out;
}

json plan_to_json(const TimestepPlan& plan) {
    return json{{"steps", plan.steps}, {"targets", plan.targets}, {"delta", plan.delta}};
}

TimestepPlan plan_from_json(const NoiseSchedule& schedule, const json& j) {
    const json& steps = req(j, "steps", "plan");
    if (!steps.is_array() || steps.empty()) fail(ErrorCode::config, "config error at plan.steps: expected a list");
    std::vector<int> s;
    for (const auto& v : steps) s.push_back(v.get<int>());
    const int delta = j.contains("delta") ? req_int(j, "delta", "plan") : 0;
    return make_explicit_plan(schedule, std::move(s), delta);
}

json denoiser_to_json(const Denoiser& denoiser) {
    json conditions = json::array();
    for (const auto& [id, params] : denoiser.condition_params()) {
        json entry{{"id", id}};
        if (params.condition.is_null) entry["null"] = true;
        if (params.condition.embedding) entry["embedding"] = vec_to_json(*params.condition.embedding);
        if (denoiser.kind() == DenoiserKind::gaussian || denoiser.kind() == DenoiserKind::gmm) {
            json comps = json::array();
            for (const auto& comp : params.components) {
                comps.push_back({{"weight", comp.weight}, {"mean", vec_to_json(comp.mean)}, {"scale", comp.scale}});
            }
            entry["components"] = comps;
        }
        if (denoiser.kind() == DenoiserKind::additive && params.offset) {
            entry["offset"] = vec_to_json(*params.offset);
        }
        conditions.push_back(entry);
    }
    json out{{"variant", to_string(denoiser.kind())},
             {"dim", denoiser.dim()},
             {"T", denoiser.T()},
             {"conditions", conditions}};
    if (denoiser.kind() == DenoiserKind::linear_random || denoiser.kind() == DenoiserKind::additive) {
        out["seed"] = denoiser.seed();
    }
    return out;
}

Denoiser denoiser_from_json(const json& j) {
    const DenoiserKind kind = denoiser_kind_from_string(req_string(j, "variant", "denoiser"));
    const int dim = req_int(j, "dim", "denoiser");
    const int T = req_int(j, "T", "denoiser");
    const json& conds = req(j, "conditions", "denoiser");
    if (!conds.is_array()) fail(ErrorCode::config, "config error at denoiser.conditions: expected a list");

    std::vector<ConditionParams> params;
    std::vector<Condition> plain;
    for (std::size_t i = 0; i < conds.size(); ++i) {
        const json& entry = conds[i];
        const std::string path = "denoiser.conditions[" + std::to_string(i) + "]";
        ConditionParams p;
        p.condition.id = req_int(entry, "id", path);
        p.condition.is_null = entry.value("null", false);
        if (entry.contains("embedding")) p.condition.embedding = req_vec(entry, "embedding", path);
        if (kind == DenoiserKind::gaussian || kind == DenoiserKind::gmm) {
            const json& comps = req(entry, "components", path);
            if (!comps.is_array() || comps.empty()) {
                fail(ErrorCode::config, "config error at " + path + ".components: expected a nonempty list");
            }
            for (std::size_t ci = 0; ci < comps.size(); ++ci) {
                const std::string cpath = path + ".components[" + std::to_string(ci) + "]";
                GmmComponent comp;
                comp.weight = comps[ci].contains("weight") ? req_double(comps[ci], "weight", cpath) : 1.0;
                comp.mean = req_vec(comps[ci], "mean", cpath);
                comp.scale = req_double(comps[ci], "scale", cpath);
                p.components.push_back(std::move(comp));
            }
        }
        if (kind == DenoiserKind::additive && entry.contains("offset")) {
            p.offset = req_vec(entry, "offset", path);
        }
        plain.push_back(p.condition);
        params.push_back(std::move(p));
    }

    const std::uint64_t seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
    switch (kind) {
        case DenoiserKind::gaussian: return Denoiser::gaussian(dim, T, std::move(params));
        case DenoiserKind::gmm: return Denoiser::gmm(dim, T, std::move(params));
        case DenoiserKind::linear_random: return Denoiser::linear_random(dim, T, seed, std::move(plain));
        case DenoiserKind::additive: return Denoiser::additive(dim, T, seed, std::move(params));
    }
    fail(ErrorCode::config, "unreachable denoiser kind");
}

std::string denoiser_hash(const Denoiser& denoiser) { return hash_hex(denoiser_to_json(denoiser)); }

json record_to_json(const InversionRecord& record) {
    json steps = json::array();
    for (const RecordStep& step : record.steps) {
        steps.push_back({{"t", step.t},
                         {"s", step.s},
                         {"x_t", vec_to_json(step.x_t)},
                         {"v", vec_to_json(step.v)},
                         {"clipped", step.clipped}});
    }
    json out{{"schedule_hash", record.schedule_hash},
             {"denoiser_hash", record.denoiser_hash},
             {"plan", plan_to_json(record.plan)},
             {"seed", record.seed},
             {"x0", vec_to_json(record.x0)},
             {"condition", record.condition_id},
             {"steps", steps}};
    if (record.clip_max) out["clip_max"] = *record.clip_max;
    if (record.cfg) out["cfg"] = json{{"phi", record.cfg->phi_id}, {"lambda", record.cfg->lambda_s}};
    return out;
}

InversionRecord record_from_json(const NoiseSchedule& schedule, const json& j) {
    InversionRecord record;
    record.schedule_hash = req_string(j, "schedule_hash", "record");
    record.denoiser_hash = req_string(j, "denoiser_hash", "record");
    record.plan = plan_from_json(schedule, req(j, "plan", "record"));
    record.seed = req(j, "seed", "record").get<std::uint64_t>();
    record.x0 = req_vec(j, "x0", "record");
    record.condition_id = req_int(j, "condition", "record");
    if (j.contains("clip_max")) record.clip_max = req_double(j, "clip_max", "record");
    if (j.contains("cfg")) {
        CfgGuidance cfg;
        cfg.phi_id = req_int(j.at("cfg"), "phi", "record.cfg");
        cfg.lambda_s = req_double(j.at("cfg"), "lambda", "record.cfg");
        record.cfg = cfg;
    }
    const json& steps = req(j, "steps", "record");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string path = "record.steps[" + std::to_string(i) + "]";
        RecordStep step;
        step.t = req_int(steps[i], "t", path);
        step.s = req_int(steps[i], "s", path);
        step.x_t = req_vec(steps[i], "x_t", path);
        step.v = req_vec(steps[i], "v", path);
        step.clipped = steps[i].value("clipped", false);
        record.steps.push_back(std::move(step));
    }
    if (record.steps.size() != record.plan.steps.size()) {
        fail(ErrorCode::config, "config error at record.steps: expected " +
                                    std::to_string(record.plan.steps.size()) + " entries");
    }
    return record;
}

json trajectory_to_json(const Trajectory& trajectory) {
    json states = json::array();
    for (const auto& [t, x] : trajectory.states) {
        states.push_back({{"t", t}, {"x", vec_to_json(x)}});
    }
    return json{{"kind", to_string(trajectory.kind)},
                {"seed", trajectory.seed},
                {"plan", plan_to_json(trajectory.plan)},
                {"condition", trajectory.condition_id},
                {"states", states}};
}

Trajectory trajectory_from_json(const NoiseSchedule& schedule, const json& j) {
    Trajectory out;
    out.kind = trajectory_kind_from_string(req_string(j, "kind", "trajectory"));
    out.seed = req(j, "seed", "trajectory").get<std::uint64_t>();
    out.plan = plan_from_json(schedule, req(j, "plan", "trajectory"));
    out.condition_id = req_int(j, "condition", "trajectory");
    const json& states = req(j, "states", "trajectory");
    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::string path = "trajectory.states[" + std::to_string(i) + "]";
        out.states.emplace_back(req_int(states[i], "t", path), req_vec(states[i], "x", path));
    }
    return out;
}

json edit_config_to_json(const EditConfig& config) {
    return json{{"mode", to_string(config.mode)},
                {"w", config.w},
                {"w_p", config.w_p},
                {"w_t", config.w_t},
                {"lambda_s", config.lambda_s}};
}

EditConfig edit_config_from_json(const json& j) {
    EditConfig config;
    if (j.contains("mode")) config.mode = edit_mode_from_string(req_string(j, "mode", "edit"));
    if (j.contains("w")) config.w = req_double(j, "w", "edit");
    if (j.contains("w_p")) config.w_p = req_double(j, "w_p", "edit");
    if (j.contains("w_t")) config.w_t = req_double(j, "w_t", "edit");
    if (j.contains("lambda_s")) config.lambda_s = req_double(j, "lambda_s", "edit");
    return config;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "step,t,s,measured_std,expected_sigma,ci_half\n";
    char buf[160];
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const CurvePoint& p = curve[k];
        std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.17g,%.17g,%.17g\n", k, p.t, p.s, p.measured_std,
                      p.expected_sigma, p.ci_half);
        out += buf;
    }
    return out;
}

std::vector<CurvePoint> curve_from_csv(const std::string& csv) {
    std::vector<CurvePoint> out;
    std::istringstream stream(csv);
    std::string line;
    bool first = true;
    while (std::getline(stream, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            first = false;
            continue;  // header
        }
        CurvePoint p;
        std::size_t k = 0;
        if (std::sscanf(line.c_str(), "%zu,%d,%d,%lf,%lf,%lf", &k, &p.t, &p.s, &p.measured_std,
                        &p.expected_sigma, &p.ci_half) != 6) {
            fail(ErrorCode::config, "curve csv: malformed row '" + line + "'");
        }
        out.push_back(p);
    }
    return out;
}

std::string offsets_to_csv(const OffsetHistogram& histogram) {
    std::string out = "t,t_star,offset\n";
    char buf[96];
    for (const OffsetRow& row : histogram.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d\n", row.t, row.t_star, row.offset);
        out += buf;
    }
    return out;
}

std::string equiv_rows_to_csv(const std::vector<EquivRow>& rows) {
    std::string out = "dim,K,denoiser_seed,lr_mode,max_abs_diff\n";
    char buf[160];
    for (const EquivRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%" PRIu64 ",%s,%.17g\n", row.dim, row.K, row.seed,
                      to_string(row.lr_mode).c_str(), row.max_abs_diff);
        out += buf;
    }
    return out;
}

std::string cfg_equiv_rows_to_csv(const std::vector<CfgEquivalenceRow>& rows) {
    std::string out = "config,dim,K,seed,w,max_abs_diff,max_residual\n";
    char buf[192];
    for (const CfgEquivalenceRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%" PRIu64 ",%.17g,%.17g,%.17g\n", row.config_index, row.dim,
                      row.K, row.seed, row.w, row.max_abs_diff, row.max_residual);
        out += buf;
    }
    return out;
}

json default_experiment_json() {
    json mean_a = json::array();
    json mean_b = json::array();
    json mean_phi = json::array();
    for (int i = 0; i < 8; ++i) {
        mean_a.push_back(0.75);
        mean_b.push_back(-0.75);
        mean_phi.push_back(0.0);
    }
    return json{
        {"schedule", {{"kind", "scaled_linear"}, {"beta_start", 0.00085}, {"beta_end", 0.012}, {"T", 1000}}},
        {"denoiser",
         {{"variant", "gmm"},
          {"dim", 8},
          {"T", 1000},
          {"conditions",
           json::array({{{"id", 0}, {"components", json::array({{{"weight", 1.0}, {"mean", mean_a}, {"scale", 1.25}}})}},
                        {{"id", 1}, {"components", json::array({{{"weight", 1.0}, {"mean", mean_b}, {"scale", 1.25}}})}},
                        {{"id", 2},
                         {"null", true},
                         {"components", json::array({{{"weight", 1.0}, {"mean", mean_phi}, {"scale", 1.6}}})}}})}}},
        {"plan", {{"k", 4}, {"t_start", 599}, {"delta", 200}}},
        {"edit", {{"mode", "pseudo"}, {"w", 1.5}, {"w_p", 1.0}, {"w_t", 1.0}, {"lambda_s", 1.0}, {"clip_max", 15.5}}},
        {"source_condition", 0},
        {"target_condition", 1},
        {"strength", 0.75},
        {"seed", 0},
        {"n", 10000},
        {"out", "out"},
    };
}

}  // namespace dil
