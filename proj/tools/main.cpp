// es1p1 command-line interface: run traces, Monte Carlo estimates, bound
// verification, and replicated experiment suites, all against the defaults
// artifact embedded at build time (tools/defaults.json).
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "defaults_data.hpp"
#include "es1p1/algorithm.hpp"
#include "es1p1/checks.hpp"
#include "es1p1/estimators.hpp"
#include "es1p1/experiments.hpp"
#include "es1p1/objectives.hpp"
#include "es1p1/serialize.hpp"

namespace {

using nlohmann::ordered_json;

// Thrown for bad invocations (unknown ids, malformed values): exit code 2,
// distinct from a failing bound check (exit code 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ordered_json load_defaults(const std::string& path) {
    if (path.empty()) return ordered_json::parse(es::cli::kDefaultsJson);
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open defaults file '" + path + "'");
    return ordered_json::parse(in);
}

ordered_json load_config(const std::string& path) {
    if (path.empty()) return ordered_json::object();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    return ordered_json::parse(in);
}

es::vec parse_vector(const std::string& text) {
    es::vec v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(static_cast<es::real>(std::stod(tok, &pos)));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("bad vector component '" + tok + "' in '" + text + "'");
        }
    }
    if (v.empty()) throw UsageError("empty vector argument '" + text + "'");
    return v;
}

es::vec vec_from_json(const nlohmann::json& j) {
    es::vec v;
    for (const auto& x : j) v.push_back(static_cast<es::real>(x.get<double>()));
    return v;
}

std::vector<double> doubles_from_json(const nlohmann::json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

// --params k=v: numbers stay numbers, comma lists become arrays, the rest are
// strings. "probes=" style structured overrides are not supported; use
// --config for those.
ordered_json parse_override_value(const std::string& text) {
    auto as_number = [](const std::string& s) -> std::optional<double> {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::exception&) {
        }
        return std::nullopt;
    };
    if (text.find(',') != std::string::npos) {
        ordered_json arr = ordered_json::array();
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            auto num = as_number(tok);
            if (!num) throw UsageError("bad list element '" + tok + "' in '" + text + "'");
            arr.push_back(*num);
        }
        return arr;
    }
    if (auto num = as_number(text)) return *num;
    return text;
}

void apply_overrides(ordered_json& target, const std::vector<std::string>& kvs) {
    for (const auto& kv : kvs) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("--params expects key=value, got '" + kv + "'");
        target[kv.substr(0, eq)] = parse_override_value(kv.substr(eq + 1));
    }
}

void write_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw UsageError("cannot open output file '" + out_path + "'");
    out << text;
}

std::string sibling_path(const std::string& out_path, const std::string& suffix) {
    std::filesystem::path p(out_path);
    std::filesystem::path q = p.parent_path() / (p.stem().string() + suffix);
    return q.string();
}

// Shared plumbing resolved once per invocation.
struct Context {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
    std::string format;  // json, jsonl, csv
    ordered_json defaults;
    ordered_json config;
    std::vector<std::string> params_kvs;
};

// ---------------------------------------------------------------------------
// run

struct RunOpts {
    std::string objective;
    std::string m0_text;
    double sigma0 = 0.0;
    long long max_iters = -1;
    double f_target = 0.0;
    bool has_f_target = false;
    double sigma_floor = 0.0;
    bool has_sigma_floor = false;
    double divergence_radius = 0.0;
    bool has_divergence_radius = false;
    long long record_stride = -1;
    double c_plus = 0.0;
    bool has_c_plus = false;
    double c_minus = 0.0;
    bool has_c_minus = false;
    bool dimension_scaled = false;
};

int cmd_run(const Context& ctx, const RunOpts& opts) {
    const ordered_json& dft = ctx.defaults.at("run");
    const ordered_json& cfg = ctx.config;

    std::string objective_spec = !opts.objective.empty() ? opts.objective
                                 : cfg.contains("objective") ? cfg["objective"].get<std::string>()
                                                             : "";
    if (objective_spec.empty()) throw UsageError("run: --objective is required");
    es::objectives::Objective objective = es::objectives::make_objective(objective_spec);

    es::vec m0;
    if (!opts.m0_text.empty())
        m0 = parse_vector(opts.m0_text);
    else if (cfg.contains("m0"))
        m0 = vec_from_json(cfg["m0"]);
    else
        throw UsageError("run: --m0 is required (comma-separated coordinates)");

    double sigma0 = opts.sigma0 > 0.0               ? opts.sigma0
                    : cfg.contains("sigma0")        ? cfg["sigma0"].get<double>()
                                                    : dft["sigma0"].get<double>();

    es::EsParams params;
    if (opts.dimension_scaled) params = es::EsParams::dimension_scaled(m0.size());
    if (cfg.contains("params")) params = es::serialize::es_params_from_json(cfg["params"], params);
    if (opts.has_c_plus) params.c_plus = opts.c_plus;
    if (opts.has_c_minus) params.c_minus = opts.c_minus;

    es::StoppingRule stopping;
    stopping.max_iterations = dft["max_iterations"].get<long long>();
    if (cfg.contains("stopping"))
        stopping = es::serialize::stopping_from_json(cfg["stopping"], stopping);
    if (opts.max_iters >= 0) stopping.max_iterations = opts.max_iters;
    if (opts.has_f_target) stopping.f_target = opts.f_target;
    if (opts.has_sigma_floor) stopping.sigma_floor = opts.sigma_floor;
    if (opts.has_divergence_radius) stopping.divergence_radius = opts.divergence_radius;

    long long record_stride = opts.record_stride >= 0 ? opts.record_stride
                              : cfg.contains("record_stride")
                                  ? cfg["record_stride"].get<long long>()
                                  : dft["record_stride"].get<long long>();

    es::EsState init;
    init.m = std::move(m0);
    init.log_sigma = std::log(sigma0);
    es::RunTrace trace =
        es::es_run(objective, params, std::move(init), stopping, ctx.seed, record_stride);

    std::ostringstream body;
    if (ctx.format == "csv")
        es::serialize::write_trace_csv(trace, body);
    else
        es::serialize::write_trace_jsonl(trace, body);
    write_text(body.str(), ctx.out);

    std::cerr << "run: " << objective.id << " -> " << es::to_string(trace.outcome) << " after "
              << trace.iterations << " iterations (final_f=" << trace.final_f << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateOpts {
    std::string what;
    std::string objective;
    std::string m_text;
    double sigma = 0.0;
    long long n = -1;
    std::string mode = "strict";
    double p = -1.0;
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    int grid_points = 0;
};

int cmd_estimate(const Context& ctx, const EstimateOpts& opts) {
    const ordered_json& dft = ctx.defaults.at("estimate");
    const ordered_json& cfg = ctx.config;

    auto str = [&](const std::string& key, const std::string& flag) {
        if (!flag.empty()) return flag;
        if (cfg.contains(key)) return cfg[key].get<std::string>();
        return std::string();
    };
    std::string what = str("what", opts.what);
    std::string objective_spec = str("objective", opts.objective);
    if (objective_spec.empty()) throw UsageError("estimate: --objective is required");
    es::objectives::Objective objective = es::objectives::make_objective(objective_spec);

    es::vec m;
    if (!opts.m_text.empty())
        m = parse_vector(opts.m_text);
    else if (cfg.contains("m"))
        m = vec_from_json(cfg["m"]);
    else
        throw UsageError("estimate: --m is required (comma-separated coordinates)");

    es::estimators::CompareMode mode = es::estimators::compare_mode_from_string(
        !opts.mode.empty() ? opts.mode : std::string("strict"));
    double sigma = opts.sigma > 0.0 ? opts.sigma
                   : cfg.contains("sigma") ? cfg["sigma"].get<double>() : 0.0;
    double p = opts.p >= 0.0 ? opts.p : cfg.contains("p") ? cfg["p"].get<double>() : -1.0;

    auto n_or = [&](const char* key) {
        if (opts.n >= 0) return opts.n;
        if (cfg.contains("n")) return cfg["n"].get<long long>();
        return dft[key].get<long long>();
    };

    ordered_json out;
    out["what"] = what;
    out["objective"] = objective.id;
    out["m"] = ordered_json::array();
    for (es::real x : m) out["m"].push_back(static_cast<double>(x));
    out["mode"] = es::estimators::to_string(mode);
    out["seed"] = ctx.seed;

    auto emit_estimate = [&](const es::estimators::EstimationResult& r) {
        out["estimate"] = r.estimate;
        out["ci_lo"] = r.ci_lo;
        out["ci_hi"] = r.ci_hi;
        out["ci_halfwidth"] = r.ci_halfwidth;
        out["n"] = r.n;
        out["boundary_flag"] = r.boundary_flag;
    };

    if (what == "success") {
        if (!(sigma > 0.0)) throw UsageError("estimate success: --sigma must be > 0");
        out["sigma"] = sigma;
        emit_estimate(es::estimators::estimate_success_prob(m, sigma, objective, n_or("n"), mode,
                                                            ctx.seed, ctx.jobs));
    } else if (what == "suboptimality") {
        emit_estimate(es::estimators::estimate_suboptimality(m, objective, n_or("n_suboptimality"),
                                                             ctx.seed, mode, ctx.jobs));
    } else if (what == "xi" || what == "eta") {
        if (p < 0.0) throw UsageError("estimate " + what + ": --p is required");
        es::estimators::SigmaGrid grid;
        if (opts.sigma_lo > 0.0) grid.lo = opts.sigma_lo;
        if (opts.sigma_hi > 0.0) grid.hi = opts.sigma_hi;
        if (opts.grid_points > 0) grid.points = opts.grid_points;
        auto r = what == "xi"
                     ? es::estimators::estimate_xi(m, p, objective, grid, n_or("n_sigma_range"),
                                                   ctx.seed, ctx.jobs)
                     : es::estimators::estimate_eta(m, p, objective, grid, n_or("n_sigma_range"),
                                                    ctx.seed, ctx.jobs);
        out["p"] = p;
        out["value"] = std::isfinite(r.value) ? ordered_json(r.value) : ordered_json("inf");
        out["resolution"] = r.resolution;
        out["status"] = es::estimators::to_string(r.status);
        out["grid_lo"] = r.grid.lo;
        out["grid_hi"] = r.grid.hi;
        out["grid_points"] = r.grid.points;
        out["n_per_point"] = r.n_per_point;
    } else if (what == "exponent") {
        double lo = opts.sigma_lo > 0.0 ? opts.sigma_lo : dft["exponent_sigma_lo"].get<double>();
        double hi = opts.sigma_hi > 0.0 ? opts.sigma_hi : dft["exponent_sigma_hi"].get<double>();
        int points = opts.grid_points > 0 ? opts.grid_points : dft["exponent_points"].get<int>();
        auto fit = es::estimators::estimate_success_exponent(m, objective, lo, hi, points,
                                                             n_or("n_exponent"), mode, ctx.seed,
                                                             ctx.jobs);
        out["sigma_lo"] = lo;
        out["sigma_hi"] = hi;
        out["slope"] = fit.slope;
        out["intercept"] = fit.intercept;
        out["residual"] = fit.residual;
        out["points_used"] = fit.points_used;
        out["points_dropped"] = fit.points_dropped;
        out["n_per_point"] = fit.n_per_point;
        ordered_json rows = ordered_json::array();
        for (const auto& row : fit.rows)
            rows.push_back({{"sigma", row.sigma},
                            {"p_hat", row.p_hat},
                            {"ci_lo", row.ci_lo},
                            {"ci_hi", row.ci_hi},
                            {"successes", row.successes}});
        out["rows"] = rows;
    } else {
        throw UsageError("estimate: unknown --what '" + what +
                         "' (valid: success, suboptimality, xi, eta, exponent)");
    }

    write_text(es::serialize::dump(out), ctx.out);
    return 0;
}

// ---------------------------------------------------------------------------
// verify

using Reports = std::vector<es::checks::BoundCheckReport>;
using Runner = std::function<Reports(const ordered_json& probe, const Context& ctx)>;

long long probe_n(const ordered_json& probe, const char* key = "n") {
    return probe.at(key).get<long long>();
}

es::vec probe_vec(const ordered_json& probe, const char* key) {
    return vec_from_json(probe.at(key));
}

// One sigma from --params, else the probe's sigma list (criteria sweep).
std::vector<double> probe_sigmas(const ordered_json& probe) {
    if (probe.contains("sigma")) return {probe["sigma"].get<double>()};
    return doubles_from_json(probe.at("sigmas"));
}

const std::vector<std::pair<std::string, Runner>>& check_registry() {
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"expected_decrease",
         [](const ordered_json& probe, const Context& ctx) {
             auto obj = es::objectives::make_objective(probe.at("objective").get<std::string>());
             Reports out;
             for (double sigma : probe_sigmas(probe))
                 out.push_back(es::checks::check_expected_decrease(
                     probe_vec(probe, "m"), sigma, obj, probe_n(probe), ctx.seed));
             return out;
         }},
        {"quantile_bound",
         [](const ordered_json& probe, const Context& ctx) {
             auto obj = es::objectives::make_objective(probe.at("objective").get<std::string>());
             std::vector<double> q_fracs = probe.contains("q_fracs")
                                               ? doubles_from_json(probe["q_fracs"])
                                               : std::vector<double>{0.1, 0.5, 0.9};
             Reports out;
             for (double sigma : probe_sigmas(probe))
                 out.push_back(es::checks::check_quantile_bound(
                     probe_vec(probe, "m"), sigma, obj, probe_n(probe), ctx.seed, q_fracs));
             return out;
         }},
        {"plateau_decrease",
         [](const ordered_json& probe, const Context& ctx) {
             auto obj = es::objectives::make_objective(probe.at("objective").get<std::string>());
             return Reports{es::checks::check_plateau_decrease(
                 probe_vec(probe, "m"), probe.at("sigma").get<double>(), obj, probe_n(probe),
                 ctx.seed, probe.value("min_level_hits", 30))};
         }},
        {"step_scaling",
         [](const ordered_json& probe, const Context& ctx) {
             auto obj = es::objectives::make_objective(probe.at("objective").get<std::string>());
             auto mode = es::estimators::compare_mode_from_string(probe.value("mode", "strict"));
             std::vector<double> a_values = probe.contains("a")
                                                ? std::vector<double>{probe["a"].get<double>()}
                                                : doubles_from_json(probe.at("a_values"));
             Reports out;
             for (double a : a_values)
                 out.push_back(es::checks::check_step_scaling(probe_vec(probe, "m"),
                                                              probe.at("sigma").get<double>(), a,
                                                              obj, probe_n(probe), ctx.seed, mode));
             return out;
         }},
        {"sigma_upper_bound",
         [](const ordered_json& probe, const Context& ctx) {
             auto obj = es::objectives::make_objective(probe.at("objective").get<std::string>());
             return Reports{es::checks::check_sigma_upper_bound(
                 probe_vec(probe, "m"), probe.at("p").get<double>(), obj, probe_n(probe),
                 ctx.seed)};
         }},
        {"gap",
         [](const ordered_json& probe, const Context& ctx) {
             auto obj = es::objectives::make_objective(probe.at("objective").get<std::string>());
             return Reports{es::checks::check_gap(
                 probe_vec(probe, "m"), probe.at("p_T").get<double>(),
                 probe.at("p_H").get<double>(), obj, es::estimators::SigmaGrid{},
                 probe_n(probe, "n_per_point"), ctx.seed, ctx.jobs)};
         }},
        {"regular_limit",
         [](const ordered_json& probe, const Context& ctx) {
             std::vector<double> sigmas =
                 probe.contains("sigmas") ? doubles_from_json(probe["sigmas"])
                                          : std::vector<double>{};
             Reports out;
             if (probe.contains("objective") && probe.contains("x")) {
                 auto obj =
                     es::objectives::make_objective(probe.at("objective").get<std::string>());
                 out.push_back(es::checks::check_regular_limit(probe_vec(probe, "x"), obj, sigmas,
                                                               probe_n(probe), ctx.seed));
                 return out;
             }
             for (const auto& p : probe.at("probes")) {
                 auto obj = es::objectives::make_objective(p.at("objective").get<std::string>());
                 out.push_back(es::checks::check_regular_limit(vec_from_json(p.at("x")), obj,
                                                               sigmas, probe_n(probe), ctx.seed));
             }
             return out;
         }},
        {"case_study_rate",
         [](const ordered_json& probe, const Context& ctx) {
             Reports out;
             if (probe.contains("kind")) {
                 out.push_back(es::checks::check_case_study_rate(
                     probe.at("kind").get<std::string>(), probe.at("a").get<double>(),
                     probe_n(probe), ctx.seed));
                 return out;
             }
             for (const auto& p : probe.at("probes"))
                 out.push_back(es::checks::check_case_study_rate(p.at("kind").get<std::string>(),
                                                                 p.at("a").get<double>(),
                                                                 probe_n(probe), ctx.seed));
             return out;
         }},
    };
    return table;
}

std::string check_id_list() {
    std::string ids;
    for (const auto& [id, fn] : check_registry()) {
        if (!ids.empty()) ids += ", ";
        ids += id;
    }
    return ids + ", all";
}

std::string summary_csv(const Reports& reports) {
    std::string out = "check,pass,slack,n\n";
    for (const auto& r : reports)
        out += r.check_id + "," + (r.pass ? "1" : "0") + "," + es::serialize::csv_num(r.slack) +
               "," + std::to_string(r.n) + "\n";
    return out;
}

struct VerifyOpts {
    std::vector<std::string> checks;
    std::string objective;
    std::string summary_csv_path;
};

int cmd_verify(const Context& ctx, const VerifyOpts& opts) {
    const ordered_json& table = ctx.defaults.at("verify");

    std::vector<std::string> requested = opts.checks;
    if (requested.empty() || (requested.size() == 1 && requested[0] == "all")) {
        requested.clear();
        for (const auto& [id, fn] : check_registry()) requested.push_back(id);
    }

    Reports reports;
    for (const std::string& id : requested) {
        const Runner* runner = nullptr;
        for (const auto& [rid, fn] : check_registry())
            if (rid == id) runner = &fn;
        if (!runner)
            throw UsageError("verify: unknown check '" + id + "' (valid: " + check_id_list() +
                             ")");
        ordered_json probe =
            table.contains(id) ? table.at(id) : ordered_json::object();
        if (ctx.config.contains(id)) probe.update(ctx.config.at(id));
        if (!opts.objective.empty()) probe["objective"] = opts.objective;
        apply_overrides(probe, ctx.params_kvs);
        Reports batch = (*runner)(probe, ctx);
        reports.insert(reports.end(), batch.begin(), batch.end());
    }

    std::string body;
    if (ctx.format == "csv") {
        body = summary_csv(reports);
    } else if (ctx.format == "jsonl") {
        for (const auto& r : reports) body += es::checks::to_json(r).dump() + "\n";
    } else {
        ordered_json arr = ordered_json::array();
        for (const auto& r : reports) arr.push_back(es::checks::to_json(r));
        body = es::serialize::dump(arr);
    }
    write_text(body, ctx.out);

    std::string csv_path = opts.summary_csv_path;
    if (csv_path.empty() && !ctx.out.empty() && ctx.format != "csv")
        csv_path = sibling_path(ctx.out, "_summary.csv");
    if (!csv_path.empty()) write_text(summary_csv(reports), csv_path);

    int failed = 0;
    for (const auto& r : reports)
        if (!r.pass) ++failed;
    std::cerr << "verify: " << reports.size() << " report(s), " << failed << " failed\n";
    return failed > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOpts {
    std::string suite;
    std::string scenario;
    std::string objective;
    std::string m0_text;
    double sigma0 = 0.0;
    int replicates = -1;
    long long max_iters = -1;
    long long record_stride = -1;
    std::vector<double> a_values;
    std::vector<int> k_values;
    std::vector<int> dims;
    bool dimension_scaled = false;
};

int cmd_experiment(const Context& ctx, const ExperimentOpts& opts) {
    const ordered_json& dft = ctx.defaults.at("experiment");
    const ordered_json& cfg = ctx.config;

    std::string suite = !opts.suite.empty() ? opts.suite
                        : cfg.contains("suite") ? cfg["suite"].get<std::string>() : "";
    if (suite.empty())
        throw UsageError(
            "experiment: --suite is required (valid: convergence, rate_vs_dimension, "
            "saddle_traversal, premature, ridge_sweep, strip_jump_sweep, occupancy)");

    es::experiments::ExperimentConfig base;
    base.replicates = dft["replicates"].get<int>();
    base.stopping.max_iterations = dft["max_iterations"].get<long long>();
    base.record_stride = dft["record_stride"].get<long long>();
    base.master_seed = ctx.seed;
    base.jobs = ctx.jobs;
    es::experiments::ExperimentConfig config = es::experiments::config_from_json(cfg, base);
    config.master_seed = ctx.seed;
    config.jobs = ctx.jobs;

    if (!opts.objective.empty()) config.objective_spec = opts.objective;
    if (!opts.m0_text.empty()) config.m0 = parse_vector(opts.m0_text);
    if (opts.sigma0 > 0.0) config.sigma0 = opts.sigma0;
    if (opts.replicates >= 0) config.replicates = opts.replicates;
    if (opts.max_iters >= 0) config.stopping.max_iterations = opts.max_iters;
    if (opts.record_stride >= 0) config.record_stride = opts.record_stride;
    if (opts.dimension_scaled && !config.m0.empty())
        config.params = es::EsParams::dimension_scaled(config.m0.size());

    auto list_d = [&](const char* key, std::vector<double> flag, std::vector<double> fallback) {
        if (!flag.empty()) return flag;
        if (cfg.contains(key)) return doubles_from_json(cfg[key]);
        return fallback;
    };
    auto list_i = [&](const char* key, std::vector<int> flag, std::vector<int> fallback) {
        if (!flag.empty()) return flag;
        if (cfg.contains(key)) {
            std::vector<int> v;
            for (const auto& x : cfg[key]) v.push_back(x.get<int>());
            return v;
        }
        return fallback;
    };

    es::experiments::ExperimentReport report;
    if (suite == "convergence") {
        report = es::experiments::run_convergence_suite(config);
    } else if (suite == "rate_vs_dimension") {
        report = es::experiments::run_rate_vs_dimension(list_i("dims", opts.dims, {2, 4, 8}),
                                                        config);
    } else if (suite == "saddle_traversal") {
        report = es::experiments::run_saddle_traversal(
            list_d("a_values", opts.a_values, {1.0, 9.0, 100.0}), config);
    } else if (suite == "premature") {
        std::string scenario = !opts.scenario.empty() ? opts.scenario
                               : cfg.contains("scenario") ? cfg["scenario"].get<std::string>()
                                                          : "cubic_saddle";
        std::vector<int> k_values = list_i("k_values", opts.k_values, {0, 10, 20, 40});
        // The premature ladders follow the dimension-scaled preset unless the
        // config pins explicit constants.
        if (!cfg.contains("params") && !opts.dimension_scaled) {
            std::size_t d = scenario == "fat_cantor" ? 1 : 2;
            config.params = es::EsParams::dimension_scaled(d);
        }
        report = es::experiments::run_premature_suite(scenario, k_values, config);
    } else if (suite == "ridge_sweep") {
        report = es::experiments::run_ridge_sweep(
            list_d("a_values", opts.a_values, {0.5, 4.0, 20.0}), config);
    } else if (suite == "strip_jump_sweep") {
        report = es::experiments::run_strip_jump_sweep(
            list_d("a_values", opts.a_values, {10.0, 0.5}), config);
    } else if (suite == "occupancy") {
        es::experiments::OccupancyOptions occ;
        if (cfg.contains("p_T")) occ.p_T = cfg["p_T"].get<double>();
        if (cfg.contains("p_H")) occ.p_H = cfg["p_H"].get<double>();
        if (cfg.contains("probe_stride")) occ.probe_stride = cfg["probe_stride"].get<long long>();
        if (cfg.contains("n_per_point")) occ.n_per_point = cfg["n_per_point"].get<long long>();
        report = es::experiments::run_occupancy(config, occ);
    } else {
        throw UsageError("experiment: unknown suite '" + suite +
                         "' (valid: convergence, rate_vs_dimension, saddle_traversal, premature, "
                         "ridge_sweep, strip_jump_sweep, occupancy)");
    }

    write_text(es::serialize::dump(es::experiments::to_json(report)), ctx.out);
    if (!ctx.out.empty()) {
        write_text(es::experiments::replicates_csv(report),
                   sibling_path(ctx.out, "_replicates.csv"));
        write_text(es::experiments::long_csv(report), sibling_path(ctx.out, "_long.csv"));
    }
    std::cerr << "experiment: suite '" << report.suite << "', " << report.groups.size()
              << " group(s)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// list-objectives

int cmd_list_objectives(const Context& ctx) {
    ordered_json arr = ordered_json::array();
    for (const auto& info : es::objectives::objective_registry()) {
        es::objectives::Objective obj = es::objectives::make_objective(info.name);
        ordered_json entry;
        entry["id"] = info.name;
        entry["parameters"] = info.params;
        entry["description"] = info.description;
        entry["dim"] = obj.dim;
        ordered_json hooks = ordered_json::array();
        if (obj.suboptimality_strict) hooks.push_back("suboptimality_strict");
        if (obj.suboptimality_weak) hooks.push_back("suboptimality_weak");
        if (obj.level_set_mass) hooks.push_back("level_set_mass");
        entry["analytic_hooks"] = hooks;
        if (obj.optimum) {
            ordered_json opt = ordered_json::array();
            for (es::real x : *obj.optimum) opt.push_back(static_cast<double>(x));
            entry["optimum"] = opt;
            entry["optimum_tolerance"] = obj.optimum_tolerance;
        }
        if (!obj.rate_table.empty()) {
            ordered_json rates = ordered_json::array();
            for (const auto& rp : obj.rate_table) {
                ordered_json rj;
                rj["name"] = rp.name;
                rj["point"] = ordered_json::array();
                for (es::real x : rp.point) rj["point"].push_back(static_cast<double>(x));
                rj["rate"] = static_cast<double>(rp.rate);
                rates.push_back(rj);
            }
            entry["rate_table"] = rates;
        }
        arr.push_back(entry);
    }
    if (ctx.format == "csv") {
        std::string out = "id,parameters,description\n";
        for (const auto& e : arr)
            out += e["id"].get<std::string>() + ",\"" + e["parameters"].get<std::string>() +
                   "\",\"" + e["description"].get<std::string>() + "\"\n";
        write_text(out, ctx.out);
    } else {
        write_text(es::serialize::dump(arr), ctx.out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"(1+1) evolution strategy testbed: traces, estimators, bound checks, and "
                 "replicated experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    std::string out, format = "json", config_path, defaults_path;
    app.add_option("--seed", seed, "RNG seed (default: fixed constant from defaults.json)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--jobs", jobs, "worker threads (default: available parallelism)");
    app.add_option("--out", out, "output path (default: stdout)");
    app.add_option("--format", format, "output format: json, jsonl, csv")
        ->check(CLI::IsMember({"json", "jsonl", "csv"}));
    app.add_option("--config", config_path, "JSON config file; flags override its keys");
    app.add_option("--defaults", defaults_path,
                   "alternate defaults.json (default: embedded copy)");

    RunOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "run one (1+1)-ES trace");
    run->add_option("--objective", run_opts.objective, "objective spec, e.g. quadratic_saddle:a=9");
    run->add_option("--m0", run_opts.m0_text, "initial point, comma-separated");
    run->add_option("--sigma0", run_opts.sigma0, "initial step size");
    run->add_option("--max-iters", run_opts.max_iters, "iteration budget");
    run->add_option("--f-target", run_opts.f_target, "stop when f(m) <= target")
        ->each([&](const std::string&) { run_opts.has_f_target = true; });
    run->add_option("--sigma-floor", run_opts.sigma_floor, "stall floor for sigma")
        ->each([&](const std::string&) { run_opts.has_sigma_floor = true; });
    run->add_option("--divergence-radius", run_opts.divergence_radius,
                    "stop when ||m|| or -f exceeds this")
        ->each([&](const std::string&) { run_opts.has_divergence_radius = true; });
    run->add_option("--record-stride", run_opts.record_stride, "trace thinning (0 = meta only)");
    run->add_option("--c-plus", run_opts.c_plus, "log step-size increase on success")
        ->each([&](const std::string&) { run_opts.has_c_plus = true; });
    run->add_option("--c-minus", run_opts.c_minus, "log step-size decrease on rejection")
        ->each([&](const std::string&) { run_opts.has_c_minus = true; });
    run->add_flag("--dimension-scaled", run_opts.dimension_scaled,
                  "use c_plus = 2/d, c_minus = -1/(2d)");

    EstimateOpts est_opts;
    CLI::App* est = app.add_subcommand("estimate", "Monte Carlo estimators");
    est->add_option("--what", est_opts.what,
                    "success, suboptimality, xi, eta, or exponent")
        ->required();
    est->add_option("--objective", est_opts.objective, "objective spec");
    est->add_option("--m", est_opts.m_text, "probe point, comma-separated");
    est->add_option("--sigma", est_opts.sigma, "step size (success probability)");
    est->add_option("--n", est_opts.n, "sample count");
    est->add_option("--mode", est_opts.mode, "comparison mode: strict or weak")
        ->check(CLI::IsMember({"strict", "weak"}));
    est->add_option("--p", est_opts.p, "threshold probability (xi / eta)");
    est->add_option("--sigma-lo", est_opts.sigma_lo, "grid lower bound (xi/eta/exponent)");
    est->add_option("--sigma-hi", est_opts.sigma_hi, "grid upper bound (xi/eta/exponent)");
    est->add_option("--points", est_opts.grid_points, "grid point count (xi/eta/exponent)");

    VerifyOpts verify_opts;
    CLI::App* verify = app.add_subcommand("verify", "empirical bound checks");
    verify->add_option("--check", verify_opts.checks,
                       "check id (repeatable; 'all' runs every check)");
    verify->add_option("--objective", verify_opts.objective, "objective spec override");
    verify->add_option("--summary-csv", verify_opts.summary_csv_path,
                       "also write the summary CSV here");
    std::vector<std::string> params_kvs;
    verify->add_option("--params", params_kvs, "probe overrides as key=value (repeatable)");

    ExperimentOpts exp_opts;
    CLI::App* exp = app.add_subcommand("experiment", "replicated experiment suites");
    exp->add_option("--suite", exp_opts.suite,
                    "convergence, rate_vs_dimension, saddle_traversal, premature, ridge_sweep, "
                    "strip_jump_sweep, occupancy");
    exp->add_option("--scenario", exp_opts.scenario,
                    "premature scenario: cubic_saddle, jump_closed_ball, fat_cantor");
    exp->add_option("--objective", exp_opts.objective, "objective spec override");
    exp->add_option("--m0", exp_opts.m0_text, "initial point, comma-separated");
    exp->add_option("--sigma0", exp_opts.sigma0, "initial step size");
    exp->add_option("--replicates", exp_opts.replicates, "replicates per group");
    exp->add_option("--max-iters", exp_opts.max_iters, "iteration budget per replicate");
    exp->add_option("--record-stride", exp_opts.record_stride,
                    "trace thinning for the long CSV (0 = no trace rows)");
    exp->add_option("--a-values", exp_opts.a_values, "sweep values (comma-separated)")
        ->delimiter(',');
    exp->add_option("--k-values", exp_opts.k_values, "premature K ladder (comma-separated)")
        ->delimiter(',');
    exp->add_option("--dims", exp_opts.dims, "dimensions (comma-separated)")->delimiter(',');
    exp->add_flag("--dimension-scaled", exp_opts.dimension_scaled,
                  "use c_plus = 2/d, c_minus = -1/(2d)");

    CLI::App* list = app.add_subcommand("list-objectives", "print the objective registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Context ctx;
        ctx.defaults = load_defaults(defaults_path);
        ctx.config = load_config(config_path);
        ctx.seed = seed_set ? seed
                   : ctx.config.contains("seed") ? ctx.config["seed"].get<std::uint64_t>()
                                                 : ctx.defaults.at("seed").get<std::uint64_t>();
        ctx.jobs = jobs > 0 ? jobs
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        ctx.out = out;
        ctx.format = format;
        ctx.params_kvs = params_kvs;

        if (*run) return cmd_run(ctx, run_opts);
        if (*est) return cmd_estimate(ctx, est_opts);
        if (*verify) return cmd_verify(ctx, verify_opts);
        if (*exp) return cmd_experiment(ctx, exp_opts);
        if (*list) return cmd_list_objectives(ctx);
        throw UsageError("no subcommand");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
