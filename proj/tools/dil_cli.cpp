// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the dil C API. Option precedence is
// flag > DIL_* environment variable > config file > built-in default.
// Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 integrity.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dil.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIntegrity = 3;

struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& message) { throw CliError{code, message}; }

int exit_code_of(dil_status status) {
    return status == DIL_ERR_INTEGRITY ? kExitIntegrity : kExitUsage;
}

void check(dil_status status, const std::string& what) {
    if (status != DIL_OK) {
        die(exit_code_of(status), what + ": " + dil_last_error());
    }
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    dil_string_free(s);
    return out;
}

// RAII wrappers over the opaque handles.
template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    explicit Handle(T* p) : ptr(p) {}
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
    ~Handle() {
        if (ptr) Free(ptr);
    }
    T* get() const { return ptr; }
    T** out() { return &ptr; }
};

using Schedule = Handle<dil_schedule, dil_schedule_free>;
using DenoiserHandle = Handle<dil_denoiser, dil_denoiser_free>;
using Plan = Handle<dil_plan, dil_plan_free>;
using Record = Handle<dil_record, dil_record_free>;
using TrajectoryHandle = Handle<dil_trajectory, dil_trajectory_free>;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> steps;
    std::optional<int> t_start;
    std::optional<int> delta;
    std::optional<double> w;
    std::optional<double> clip_norm;
    std::optional<std::string> mode;
    std::optional<int> n;
    // per-command extras
    std::string record_path;
    std::string curve_path;
    std::optional<int> source;
    std::optional<int> target;
    double strength = 0.0;
    int configs = 0;
    std::string lr_mode = "eq_lr";
    std::string stride = "plan";
};

template <typename T>
void env_override(const char* name, std::optional<T>& slot) {
    const char* value = std::getenv(name);
    if (value == nullptr || slot.has_value()) return;  // flags already win
    std::istringstream stream{std::string(value)};
    T parsed;
    if (stream >> parsed) slot = parsed;
}

void env_override_string(const char* name, std::optional<std::string>& slot) {
    const char* value = std::getenv(name);
    if (value != nullptr && !slot.has_value()) slot = std::string(value);
}

json load_config(const Options& options) {
    char* raw = nullptr;
    check(dil_default_config(&raw), "default config");
    json config = json::parse(take_string(raw));

    std::string path = options.config_path;
    if (path.empty()) {
        const char* env = std::getenv("DIL_CONFIG");
        if (env != nullptr) path = env;
    }
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) die(kExitUsage, "cannot open config file " + path);
        json file = json::parse(in, nullptr, false);
        if (file.is_discarded()) die(kExitUsage, "config error at " + path + ": malformed JSON");
        config.merge_patch(file);
    }
    return config;
}

void apply_overrides(json& config, const Options& options) {
    auto seed = options.seed;
    auto out = options.out;
    auto steps = options.steps;
    auto t_start = options.t_start;
    auto delta = options.delta;
    auto w = options.w;
    auto clip = options.clip_norm;
    auto mode = options.mode;
    auto n = options.n;
    env_override("DIL_SEED", seed);
    env_override_string("DIL_OUT", out);
    env_override("DIL_STEPS", steps);
    env_override("DIL_T_START", t_start);
    env_override("DIL_DELTA", delta);
    env_override("DIL_W", w);
    env_override("DIL_CLIP_NORM", clip);
    env_override_string("DIL_MODE", mode);
    env_override("DIL_N", n);

    if (seed) config["seed"] = *seed;
    if (out) config["out"] = *out;
    if (steps) {
        config["plan"]["k"] = *steps;
        config["plan"].erase("steps");
    }
    if (t_start) config["plan"]["t_start"] = *t_start;
    if (delta) config["plan"]["delta"] = *delta;
    if (w) config["edit"]["w"] = *w;
    if (clip) config["edit"]["clip_max"] = *clip;
    if (mode) config["edit"]["mode"] = *mode;
    if (n) config["n"] = *n;
    if (options.source) config["source_condition"] = *options.source;
    if (options.target) config["target_condition"] = *options.target;
}

struct Experiment {
    json config;
    std::string config_hash;
    Schedule schedule;
    DenoiserHandle denoiser;
    Plan plan;
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
};

Experiment open_experiment(const Options& options) {
    Experiment exp;
    exp.config = load_config(options);
    apply_overrides(exp.config, options);

    // The output directory is a filesystem location, not part of the
    // experiment's identity; keep it out of the hash.
    json hashed = exp.config;
    hashed.erase("out");
    char* hash = nullptr;
    check(dil_config_hash(hashed.dump().c_str(), &hash), "config hash");
    exp.config_hash = take_string(hash);

    check(dil_schedule_create(exp.config.at("schedule").dump().c_str(), exp.schedule.out()), "schedule");
    check(dil_denoiser_create(exp.config.at("denoiser").dump().c_str(), exp.denoiser.out()), "denoiser");

    const json& plan = exp.config.at("plan");
    const int delta = plan.value("delta", 0);
    if (plan.contains("steps")) {
        std::vector<int> steps = plan.at("steps").get<std::vector<int>>();
        check(dil_plan_explicit(exp.schedule.get(), steps.data(), steps.size(), delta, exp.plan.out()), "plan");
    } else {
        check(dil_plan_uniform(exp.schedule.get(), plan.value("k", 4), plan.value("t_start", 599), delta,
                               exp.plan.out()),
              "plan");
    }

    exp.seed = exp.config.value("seed", 0ULL);
    exp.out_dir = exp.config.value("out", std::string("out"));
    return exp;
}

std::vector<double> resolve_x0(const Experiment& exp) {
    size_t dim = 0;
    check(dil_denoiser_dim(exp.denoiser.get(), &dim), "denoiser dim");
    std::vector<double> x0(dim);
    if (exp.config.contains("x0")) {
        const auto given = exp.config.at("x0").get<std::vector<double>>();
        if (given.size() != dim) die(kExitUsage, "config error at x0: expected " + std::to_string(dim) + " values");
        return given;
    }
    check(dil_denoiser_sample_x0(exp.denoiser.get(), exp.config.value("source_condition", 0), exp.seed,
                                 x0.data(), dim),
          "sample x0");
    return x0;
}

void write_file(const Experiment& exp, const std::string& name, const std::string& body, bool hash_comment) {
    std::filesystem::create_directories(exp.out_dir);
    const auto path = exp.out_dir / name;
    std::ofstream out(path);
    if (!out) die(kExitUsage, "cannot write " + path.string());
    if (hash_comment) out << "# config_hash " << exp.config_hash << "\n";
    out << body;
}

// JSON outputs carry the hash as a field rather than a comment line.
void write_json_file(const Experiment& exp, const std::string& name, const std::string& body) {
    json j = json::parse(body);
    j["config_hash"] = exp.config_hash;
    write_file(exp, name, j.dump(2) + "\n", false);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) die(kExitUsage, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string invert_options_json(const Experiment& exp) {
    const json& edit = exp.config.at("edit");
    json options = json::object();
    if (edit.contains("clip_max")) options["clip_max"] = edit.at("clip_max");
    if (edit.value("mode", "pseudo") == "cfg_both" && edit.value("lambda_s", 1.0) != 1.0) {
        int phi = -1;
        for (const auto& cond : exp.config.at("denoiser").at("conditions")) {
            if (cond.value("null", false)) phi = cond.at("id").get<int>();
        }
        if (phi < 0) die(kExitUsage, "config error at denoiser.conditions: cfg_both needs a null condition");
        options["cfg"] = json{{"phi", phi}, {"lambda", edit.at("lambda_s")}};
    }
    return options.dump();
}

std::vector<double> trajectory_final(const TrajectoryHandle& traj) {
    size_t dim = 0;
    check(dil_trajectory_dim(traj.get(), &dim), "trajectory dim");
    std::vector<double> out(dim);
    check(dil_trajectory_final_state(traj.get(), out.data(), dim), "trajectory final state");
    return out;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

// ---- subcommands ----

int cmd_schedule_dump(const Experiment& exp) {
    char* csv = nullptr;
    check(dil_schedule_table_csv(exp.schedule.get(), &csv), "schedule-dump");
    write_file(exp, "schedule.csv", take_string(csv), true);
    const json& sched = exp.config.at("schedule");
    std::cout << "schedule-dump kind=" << sched.value("kind", "?") << " T=" << sched.value("T", 0)
              << " -> " << (exp.out_dir / "schedule.csv").string() << "\n";
    return kExitOk;
}

int cmd_invert(const Experiment& exp) {
    const auto x0 = resolve_x0(exp);
    Record record;
    check(dil_invert(exp.schedule.get(), exp.denoiser.get(), exp.plan.get(), x0.data(), x0.size(),
                     exp.config.value("source_condition", 0), exp.seed, invert_options_json(exp).c_str(),
                     record.out()),
          "invert");
    char* record_json = nullptr;
    check(dil_record_to_json(record.get(), &record_json), "record json");
    write_json_file(exp, "record.json", take_string(record_json));
    std::cout << "invert seed=" << exp.seed << " steps=" << exp.config.at("plan").value("k", 0)
              << " -> " << (exp.out_dir / "record.json").string() << "\n";
    return kExitOk;
}

Record load_record(const Experiment& exp, const Options& options) {
    std::filesystem::path path = options.record_path.empty() ? exp.out_dir / "record.json"
                                                             : std::filesystem::path(options.record_path);
    json loaded = json::parse(read_file(path), nullptr, false);
    if (loaded.is_discarded()) die(kExitUsage, "record error at " + path.string() + ": malformed JSON");
    loaded.erase("config_hash");
    Record record;
    check(dil_record_from_json(exp.schedule.get(), loaded.dump().c_str(), record.out()), "record");
    return record;
}

int cmd_edit(const Experiment& exp, const Options& options) {
    Record record = load_record(exp, options);
    const int target = exp.config.value("target_condition", 1);
    const std::string edit_json = exp.config.at("edit").dump();
    TrajectoryHandle traj;
    check(dil_edit(exp.schedule.get(), exp.denoiser.get(), record.get(), target, edit_json.c_str(), traj.out()),
          "edit");

    char* traj_json = nullptr;
    check(dil_trajectory_to_json(traj.get(), &traj_json), "trajectory json");
    write_json_file(exp, "trajectory.json", take_string(traj_json));

    char* record_json = nullptr;
    check(dil_record_to_json(record.get(), &record_json), "record json");
    const auto x0 = json::parse(take_string(record_json)).at("x0").get<std::vector<double>>();
    const auto final_state = trajectory_final(traj);
    const double distance = l2_distance(final_state, x0);

    double responsibility = std::nan("");
    const int source = exp.config.value("source_condition", 0);
    (void)dil_target_responsibility(exp.denoiser.get(), final_state.data(), final_state.size(), target, source,
                                    &responsibility);

    const json& edit = exp.config.at("edit");
    std::ostringstream row;
    row << exp.seed << "," << edit.value("mode", "pseudo") << "," << edit.value("w", 1.5) << "," << distance
        << "," << responsibility << "\n";
    write_file(exp, "edit_summary.csv", "seed,mode,w,distance_to_source,target_responsibility\n" + row.str(),
               true);

    std::cout << "edit mode=" << edit.value("mode", "pseudo") << " w=" << edit.value("w", 1.5)
              << " distance_to_source=" << distance << " target_responsibility=" << responsibility << " -> "
              << (exp.out_dir / "trajectory.json").string() << "\n";
    return kExitOk;
}

int cmd_reconstruct_check(const Experiment& exp) {
    const auto x0 = resolve_x0(exp);
    double max_rel_err = 0.0;
    check(dil_reconstruct_check(exp.schedule.get(), exp.denoiser.get(), exp.plan.get(), x0.data(), x0.size(),
                                exp.config.value("source_condition", 0), exp.seed,
                                invert_options_json(exp).c_str(), &max_rel_err),
          "reconstruct-check");
    const bool ok = max_rel_err <= 1e-6;
    std::cout << "reconstruct-check max_rel_err=" << max_rel_err << (ok ? " (ok)" : " (FAIL)") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_equiv_dds(const Experiment& exp, const Options& options) {
    const int configs = options.configs > 0 ? options.configs : 50;
    json request{{"configs", configs}, {"base_seed", exp.seed}, {"lr_mode", options.lr_mode}};
    char* csv_raw = nullptr;
    check(dil_dds_equiv_csv(exp.schedule.get(), request.dump().c_str(), &csv_raw), "equiv-dds");
    const std::string csv = take_string(csv_raw);
    write_file(exp, "equiv_dds.csv", csv, true);

    double worst = 0.0;
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) {
        const auto pos = line.rfind(',');
        if (pos != std::string::npos) worst = std::max(worst, std::stod(line.substr(pos + 1)));
    }
    const bool ok = options.lr_mode == "eq_lr" ? worst <= 1e-9 : true;
    std::cout << "equiv-dds configs=" << configs << " lr_mode=" << options.lr_mode << " max_abs_diff=" << worst
              << (ok ? " (ok)" : " (FAIL)") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_equiv_cfg(const Experiment& exp, const Options& options) {
    const int configs = options.configs > 0 ? options.configs : 100;
    json request{{"configs", configs}, {"base_seed", exp.seed}};
    char* csv_raw = nullptr;
    check(dil_cfg_equiv_csv(exp.schedule.get(), request.dump().c_str(), &csv_raw), "equiv-cfg");
    const std::string csv = take_string(csv_raw);
    write_file(exp, "equiv_cfg.csv", csv, true);

    double worst_diff = 0.0, worst_residual = 0.0;
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        double diff = 0.0, residual = 0.0;
        const auto p2 = line.rfind(',');
        const auto p1 = line.rfind(',', p2 - 1);
        residual = std::stod(line.substr(p2 + 1));
        diff = std::stod(line.substr(p1 + 1, p2 - p1 - 1));
        worst_diff = std::max(worst_diff, diff);
        worst_residual = std::max(worst_residual, residual);
    }
    const bool ok = worst_diff <= 1e-9;
    std::cout << "equiv-cfg configs=" << configs << " max_abs_diff=" << worst_diff
              << " max_residual=" << worst_residual << (ok ? " (ok)" : " (FAIL)") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_stats(const Experiment& exp) {
    json request{{"n", exp.config.value("n", 10000)},
                 {"seed", exp.seed},
                 {"condition", exp.config.value("source_condition", 0)}};
    char* csv_raw = nullptr;
    check(dil_correction_std_csv(exp.schedule.get(), exp.denoiser.get(), exp.plan.get(), request.dump().c_str(),
                                 &csv_raw),
          "stats");
    const std::string csv = take_string(csv_raw);
    write_file(exp, "curve.csv", csv, true);

    bool above = true;
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        std::size_t k = 0;
        int t = 0, s = 0;
        double measured = 0.0, expected = 0.0, ci = 0.0;
        if (std::sscanf(line.c_str(), "%zu,%d,%d,%lf,%lf,%lf", &k, &t, &s, &measured, &expected, &ci) == 6) {
            above = above && measured > expected;
        }
    }
    std::cout << "stats n=" << exp.config.value("n", 10000) << " measured_above_expected="
              << (above ? "true" : "false") << " -> " << (exp.out_dir / "curve.csv").string() << "\n";
    return kExitOk;
}

int cmd_offsets(const Experiment& exp, const Options& options) {
    std::filesystem::path curve_path =
        options.curve_path.empty() ? exp.out_dir / "curve.csv" : std::filesystem::path(options.curve_path);
    const std::string curve_csv = read_file(curve_path);
    json request{{"stride", options.stride}};
    char* csv_raw = nullptr;
    check(dil_offset_histogram_csv(exp.schedule.get(), curve_csv.c_str(), request.dump().c_str(), &csv_raw),
          "offsets");
    const std::string csv = take_string(csv_raw);
    write_file(exp, "offsets.csv", csv, true);

    std::string median = "?";
    std::istringstream rows(csv);
    std::string line;
    while (std::getline(rows, line)) {
        if (line.rfind("# median_offset ", 0) == 0) median = line.substr(16);
    }
    std::cout << "offsets median_offset=" << median << " -> " << (exp.out_dir / "offsets.csv").string() << "\n";
    return kExitOk;
}

int cmd_cosine(const Experiment& exp, const Options& options) {
    Record record = [&] {
        if (!options.record_path.empty() || std::filesystem::exists(exp.out_dir / "record.json")) {
            return load_record(exp, options);
        }
        const auto x0 = resolve_x0(exp);
        Record fresh;
        check(dil_invert(exp.schedule.get(), exp.denoiser.get(), exp.plan.get(), x0.data(), x0.size(),
                         exp.config.value("source_condition", 0), exp.seed, "{}", fresh.out()),
              "invert");
        return fresh;
    }();
    char* csv_raw = nullptr;
    check(dil_cosine_csv(exp.schedule.get(), exp.denoiser.get(), record.get(),
                         exp.config.value("target_condition", 1), &csv_raw),
          "cosine");
    const std::string csv = take_string(csv_raw);
    write_file(exp, "cosine.csv", csv, true);

    double sum_a = 0.0;
    int count = 0;
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        int t = 0;
        double a = 0.0, b = 0.0;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &t, &a, &b) == 3) {
            sum_a += a;
            ++count;
        }
    }
    std::cout << "cosine mean_cos_a=" << (count ? sum_a / count : std::nan("")) << " -> "
              << (exp.out_dir / "cosine.csv").string() << "\n";
    return kExitOk;
}

int cmd_sdedit(const Experiment& exp, const Options& options) {
    const auto x0 = resolve_x0(exp);
    const double strength = options.strength > 0.0 ? options.strength : exp.config.value("strength", 0.75);
    TrajectoryHandle traj;
    check(dil_sdedit(exp.schedule.get(), exp.denoiser.get(), exp.plan.get(), x0.data(), x0.size(), strength,
                     exp.config.value("target_condition", 1), exp.seed, traj.out()),
          "sdedit");
    char* traj_json = nullptr;
    check(dil_trajectory_to_json(traj.get(), &traj_json), "trajectory json");
    write_json_file(exp, "sdedit.json", take_string(traj_json));
    const double distance = l2_distance(trajectory_final(traj), x0);
    std::cout << "sdedit strength=" << strength << " distance_to_source=" << distance << " -> "
              << (exp.out_dir / "sdedit.json").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dil: few-step DDPM inversion and editing laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    Options options;
    app.add_option("--config", options.config_path, "experiment config JSON (env DIL_CONFIG)");
    app.add_option("--seed", options.seed, "base seed (env DIL_SEED)");
    app.add_option("--out", options.out, "output directory (env DIL_OUT)");
    app.add_option("--steps", options.steps, "number of plan steps K (env DIL_STEPS)");
    app.add_option("--t-start", options.t_start, "first source timestep (env DIL_T_START)");
    app.add_option("--delta", options.delta, "evaluation-time shift (env DIL_DELTA)");
    app.add_option("--w", options.w, "pseudo-guidance scale (env DIL_W)");
    app.add_option("--clip-norm", options.clip_norm, "final-step correction norm ceiling (env DIL_CLIP_NORM)");
    app.add_option("--mode", options.mode, "edit mode: ef|decomposed|pseudo|cfg_both (env DIL_MODE)");
    app.add_option("--n", options.n, "Monte-Carlo sample count (env DIL_N)");
    app.add_option("--source", options.source, "source condition id");
    app.add_option("--target", options.target, "target condition id");

    auto* schedule_dump = app.add_subcommand("schedule-dump", "write the schedule table CSV");
    auto* invert = app.add_subcommand("invert", "compute and store an inversion record");
    auto* edit = app.add_subcommand("edit", "replay a record under a target condition");
    edit->add_option("--record", options.record_path, "record JSON path (default <out>/record.json)");
    auto* reconstruct = app.add_subcommand("reconstruct-check", "verify the inversion round trip");
    auto* equiv_dds = app.add_subcommand("equiv-dds", "DDS vs edit-friendly equivalence report");
    equiv_dds->add_option("--configs", options.configs, "number of random configs (default 50)");
    equiv_dds->add_option("--lr-mode", options.lr_mode, "eq_lr | constant");
    auto* equiv_cfg = app.add_subcommand("equiv-cfg", "pseudo-guidance vs CFG-both report");
    equiv_cfg->add_option("--configs", options.configs, "number of random configs (default 100)");
    auto* stats = app.add_subcommand("stats", "correction std curve");
    auto* offsets = app.add_subcommand("offsets", "timestep offset histogram from a curve CSV");
    offsets->add_option("--curve", options.curve_path, "curve CSV path (default <out>/curve.csv)");
    offsets->add_option("--stride", options.stride, "plan | adjacent");
    auto* cosine = app.add_subcommand("cosine", "per-step guidance cosine diagnostics");
    cosine->add_option("--record", options.record_path, "record JSON path");
    auto* sdedit_cmd = app.add_subcommand("sdedit", "noise-and-denoise baseline");
    sdedit_cmd->add_option("--strength", options.strength, "noising strength in (0,1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Experiment exp = open_experiment(options);
        if (schedule_dump->parsed()) return cmd_schedule_dump(exp);
        if (invert->parsed()) return cmd_invert(exp);
        if (edit->parsed()) return cmd_edit(exp, options);
        if (reconstruct->parsed()) return cmd_reconstruct_check(exp);
        if (equiv_dds->parsed()) return cmd_equiv_dds(exp, options);
        if (equiv_cfg->parsed()) return cmd_equiv_cfg(exp, options);
        if (stats->parsed()) return cmd_stats(exp);
        if (offsets->parsed()) return cmd_offsets(exp, options);
        if (cosine->parsed()) return cmd_cosine(exp, options);
        if (sdedit_cmd->parsed()) return cmd_sdedit(exp, options);
        die(kExitUsage, "no subcommand selected");
    } catch (const CliError& e) {
        std::cerr << "dil: " << e.message << "\n";
        return e.exit_code;
    } catch (const json::exception& e) {
        std::cerr << "dil: config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "dil: " << e.what() << "\n";
        return kExitUsage;
    }
}
