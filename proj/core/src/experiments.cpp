#include "es1p1/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "es1p1/estimators.hpp"
#include "es1p1/serialize.hpp"

namespace es::experiments {

namespace {

using estimators::Wilson;
using estimators::wilson_interval;

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    std::size_t k = v.size() / 2;
    return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

nlohmann::ordered_json vec_json(const vec& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (real x : v) a.push_back(static_cast<double>(x));
    return a;
}

vec vec_from_json(const nlohmann::json& j) {
    vec v;
    for (const auto& x : j) v.push_back(static_cast<real>(x.get<double>()));
    return v;
}

// Least-squares slope of ln f over the trailing half of the recorded
// samples (discarding the transient); 0 when fewer than two positive-f
// points remain. Indexing by record rather than by iteration keeps short
// runs measurable even when the recording stride was sized for the full
// iteration budget.
double log_f_slope(const RunTrace& trace) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : trace.records) {
        if (!(r.f_parent > 0.0)) continue;
        pts.emplace_back(static_cast<double>(r.t), std::log(r.f_parent));
    }
    if (pts.size() < 2) return 0.0;
    pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(pts.size() / 2));
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(pts.size());
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

nlohmann::ordered_json outcome_aggregates(const std::vector<ReplicateSummary>& reps) {
    long long counts[4] = {0, 0, 0, 0};
    std::vector<double> iters_converged, slopes_converged;
    for (const auto& r : reps) {
        counts[static_cast<int>(r.outcome)] += 1;
        if (r.outcome == Outcome::ConvergedToOptimum) {
            iters_converged.push_back(static_cast<double>(r.iterations));
            if (r.log_f_slope != 0.0) slopes_converged.push_back(r.log_f_slope);
        }
    }
    long long n = static_cast<long long>(reps.size());
    nlohmann::ordered_json j;
    j["n_replicates"] = n;
    nlohmann::ordered_json freq;
    const Outcome order[4] = {Outcome::ConvergedToOptimum, Outcome::Diverged, Outcome::Stalled,
                              Outcome::BudgetExhausted};
    for (Outcome o : order) {
        long long c = counts[static_cast<int>(o)];
        Wilson w = wilson_interval(c, n);
        freq[to_string(o)] = {{"count", c},
                              {"frequency", static_cast<double>(c) / static_cast<double>(n)},
                              {"ci_lo", w.lo},
                              {"ci_hi", w.hi}};
    }
    j["outcomes"] = freq;
    double med_it = median(iters_converged);
    j["median_iterations_converged"] =
        std::isnan(med_it) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(med_it);
    double med_slope = median(slopes_converged);
    j["median_log_f_slope"] =
        std::isnan(med_slope) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(med_slope);
    return j;
}

long long group_count(const GroupResult& g, Outcome o) {
    long long c = 0;
    for (const auto& r : g.replicates)
        if (r.outcome == o) ++c;
    return c;
}

// Default start point when a suite leaves m0 to the config: alternating
// (-2, 2, -2, ...) matches the canonical Rosenbrock start in d=2.
vec alternating_init(std::size_t d) {
    vec m(d);
    for (std::size_t i = 0; i < d; ++i) m[i] = (i % 2 == 0) ? -2.0L : 2.0L;
    return m;
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["objective"] = config.objective_spec;
    j["params"] = serialize::to_json(config.params);
    j["m0"] = vec_json(config.m0);
    j["sigma0"] = config.sigma0;
    j["replicates"] = config.replicates;
    j["stopping"] = serialize::to_json(config.stopping);
    j["master_seed"] = config.master_seed;
    j["record_stride"] = config.record_stride;
    j["jobs"] = config.jobs;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base) {
    if (j.contains("objective")) base.objective_spec = j.at("objective").get<std::string>();
    if (j.contains("params")) base.params = serialize::es_params_from_json(j.at("params"), base.params);
    if (j.contains("m0")) base.m0 = vec_from_json(j.at("m0"));
    if (j.contains("sigma0")) base.sigma0 = j.at("sigma0").get<double>();
    if (j.contains("replicates")) base.replicates = j.at("replicates").get<int>();
    if (j.contains("stopping"))
        base.stopping = serialize::stopping_from_json(j.at("stopping"), base.stopping);
    if (j.contains("master_seed")) base.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("record_stride")) base.record_stride = j.at("record_stride").get<long long>();
    if (j.contains("jobs")) base.jobs = j.at("jobs").get<int>();
    return base;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, int replicate_index) {
    return Rng::substream(master_seed, static_cast<std::uint64_t>(replicate_index)).state;
}

GroupResult run_group(const std::string& label, const ExperimentConfig& config) {
    GroupResult group;
    group.label = label;
    group.config = config;

    objectives::Objective objective = objectives::make_objective(config.objective_spec);
    group.objective_id = objective.id;
    if (config.m0.size() != objective.dim)
        throw std::invalid_argument("experiment group '" + label + "': m0 dimension " +
                                    std::to_string(config.m0.size()) + " != objective dimension " +
                                    std::to_string(objective.dim));
    if (!(config.sigma0 > 0.0))
        throw std::invalid_argument("experiment group '" + label + "': sigma0 must be > 0");

    // When no recording stride is requested, sample finely enough that even
    // runs finishing in a small fraction of the budget leave a fittable
    // ln-f tail (the records are transient in that case, never retained).
    long long slope_stride = config.record_stride > 0
                                 ? config.record_stride
                                 : std::max<long long>(1, config.stopping.max_iterations / 4096);

    int n = config.replicates;
    group.replicates.resize(static_cast<std::size_t>(n));
    if (config.record_stride > 0) group.traces.resize(static_cast<std::size_t>(n));

    auto run_one = [&](int i) {
        EsState init;
        init.m = config.m0;
        init.log_sigma = std::log(config.sigma0);
        std::uint64_t seed = replicate_seed(config.master_seed, i);
        RunTrace trace =
            es_run(objective, config.params, std::move(init), config.stopping, seed, slope_stride);

        ReplicateSummary s;
        s.index = i;
        s.seed = seed;
        s.outcome = trace.outcome;
        s.final_f = trace.final_f;
        s.final_log_sigma = trace.final_state.log_sigma;
        s.iterations = trace.iterations;
        s.stall_reason = trace.stall_reason;
        s.log_f_slope = log_f_slope(trace);
        group.replicates[static_cast<std::size_t>(i)] = s;
        if (config.record_stride > 0)
            group.traces[static_cast<std::size_t>(i)] = std::move(trace);
    };

    if (config.jobs <= 1) {
        for (int i = 0; i < n; ++i) run_one(i);
    } else {
        int workers = std::min(config.jobs, n);
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            threads.emplace_back([&, w] {
                for (int i = w; i < n; i += workers) run_one(i);
            });
        for (auto& t : threads) t.join();
    }

    group.aggregates = outcome_aggregates(group.replicates);
    return group;
}

ExperimentReport run_convergence_suite(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    if (c.objective_spec.empty()) c.objective_spec = "sphere:d=2";
    if (c.m0.empty()) c.m0 = alternating_init(objectives::make_objective(c.objective_spec).dim);
    if (!c.stopping.f_target) c.stopping.f_target = 1e-10;
    ExperimentReport report;
    report.suite = "convergence";
    report.config_echo = to_json(c);
    report.groups.push_back(run_group(c.objective_spec, c));
    const auto& g = report.groups.back();
    report.summary = {{"converged", group_count(g, Outcome::ConvergedToOptimum)},
                      {"replicates", c.replicates},
                      {"aggregates", g.aggregates}};
    return report;
}

ExperimentReport run_rate_vs_dimension(const std::vector<int>& dims,
                                       const ExperimentConfig& config) {
    if (dims.empty()) throw std::invalid_argument("run_rate_vs_dimension: empty dimension list");
    ExperimentReport report;
    report.suite = "rate_vs_dimension";
    report.config_echo = to_json(config);

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::vector<double> med_slopes;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("run_rate_vs_dimension: d must be >= 1");
        ExperimentConfig c = config;
        c.objective_spec = "sphere:d=" + std::to_string(d);
        c.m0 = vec(static_cast<std::size_t>(d),
                   static_cast<real>(1.0 / std::sqrt(static_cast<double>(d))));
        report.groups.push_back(run_group("d=" + std::to_string(d), c));
        const auto& g = report.groups.back();
        std::vector<double> slopes;
        for (const auto& r : g.replicates)
            if (r.log_f_slope != 0.0) slopes.push_back(r.log_f_slope);
        med_slopes.push_back(median(slopes));
        rows.push_back({{"d", d},
                        {"median_log_f_slope", med_slopes.back()},
                        {"converged", group_count(g, Outcome::ConvergedToOptimum)}});
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i]["rate_ratio_vs_first"] =
            med_slopes[i] != 0.0 ? med_slopes[0] / med_slopes[i] : 0.0;
    report.summary = {{"rows", rows}};
    return report;
}

ExperimentReport run_saddle_traversal(const std::vector<double>& a_values,
                                      const ExperimentConfig& config) {
    ExperimentConfig base = config;
    if (base.m0.empty()) {
        base.m0 = vec{0.1L, 0.0L};
        base.sigma0 = 0.02;
    }
    if (!base.stopping.f_target) base.stopping.f_target = -1.0;

    ExperimentReport report;
    report.suite = "saddle_traversal";
    report.config_echo = to_json(base);

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double a : a_values) {
        ExperimentConfig c = base;
        c.objective_spec = "quadratic_saddle:a=" + fmt(a);
        report.groups.push_back(run_group("a=" + fmt(a), c));
        const auto& g = report.groups.back();
        long long traversed = group_count(g, Outcome::ConvergedToOptimum);
        Wilson w = wilson_interval(traversed, c.replicates);
        rows.push_back({{"a", a},
                        {"rate_at_origin", 2.0 * std::atan(1.0 / std::sqrt(a)) / std::numbers::pi},
                        {"traversed", traversed},
                        {"frequency", static_cast<double>(traversed) / c.replicates},
                        {"ci_lo", w.lo},
                        {"ci_hi", w.hi}});
    }
    report.summary = {{"rows", rows},
                      {"note", "traversal = f(m) <= -1 reached within budget"}};
    return report;
}

ExperimentReport run_premature_suite(const std::string& scenario, const std::vector<int>& k_values,
                                     const ExperimentConfig& config) {
    ExperimentConfig base = config;
    if (scenario == "cubic_saddle") {
        if (base.objective_spec.empty()) base.objective_spec = "cubic_saddle";
        if (base.m0.empty()) base.m0 = vec{0.0L, 0.0L};
        if (!base.stopping.divergence_radius) base.stopping.divergence_radius = 4.0;
    } else if (scenario == "jump_closed_ball") {
        if (base.objective_spec.empty()) base.objective_spec = "sphere_jump:variant=closed_ball,d=2";
        if (base.m0.empty()) base.m0 = vec{1.5L, 0.0L};
        if (!base.stopping.divergence_radius) base.stopping.divergence_radius = 100.0;
    } else if (scenario == "fat_cantor") {
        if (base.objective_spec.empty()) base.objective_spec = "cantor_barrier:variant=fat,depth=60";
        if (base.m0.empty()) base.m0 = vec{1e-3L};
        if (!base.stopping.divergence_radius) base.stopping.divergence_radius = 2.0;
    } else {
        throw std::invalid_argument("run_premature_suite: unknown scenario '" + scenario +
                                    "' (valid: cubic_saddle, jump_closed_ball, fat_cantor)");
    }
    if (!base.stopping.sigma_floor) base.stopping.sigma_floor = 1e-250;

    ExperimentReport report;
    report.suite = "premature";
    report.config_echo = to_json(base);
    report.config_echo["scenario"] = scenario;

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int k : k_values) {
        ExperimentConfig c = base;
        c.sigma0 = std::exp(static_cast<double>(k) * c.params.c_minus);
        report.groups.push_back(run_group("K=" + std::to_string(k), c));
        const auto& g = report.groups.back();
        long long stalled = group_count(g, Outcome::Stalled);
        Wilson w = wilson_interval(stalled, c.replicates);
        rows.push_back({{"K", k},
                        {"sigma0", c.sigma0},
                        {"stalled", stalled},
                        {"frequency", static_cast<double>(stalled) / c.replicates},
                        {"ci_lo", w.lo},
                        {"ci_hi", w.hi}});
    }
    report.summary = {{"scenario", scenario}, {"rows", rows}};
    return report;
}

ExperimentReport run_ridge_sweep(const std::vector<double>& a_values,
                                 const ExperimentConfig& config) {
    ExperimentConfig base = config;
    if (base.m0.empty()) base.m0 = vec{0.0L, 1.0L};
    if (!base.stopping.sigma_floor) base.stopping.sigma_floor = 1e-250;
    if (!base.stopping.divergence_radius) base.stopping.divergence_radius = 1e6;

    ExperimentReport report;
    report.suite = "ridge_sweep";
    report.config_echo = to_json(base);

    double tau = base.params.tau();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double a : a_values) {
        ExperimentConfig c = base;
        c.objective_spec = "linear_ridge:a=" + fmt(a);
        report.groups.push_back(run_group("a=" + fmt(a), c));
        const auto& g = report.groups.back();
        double rate = std::atan(1.0 / a) / std::numbers::pi;
        rows.push_back({{"a", a},
                        {"ridge_rate", rate},
                        {"predicted_regime", rate > tau ? "diverge" : "stall_possible"},
                        {"diverged", group_count(g, Outcome::Diverged)},
                        {"stalled", group_count(g, Outcome::Stalled)},
                        {"budget_exhausted", group_count(g, Outcome::BudgetExhausted)}});
    }
    report.summary = {{"tau", tau}, {"rows", rows}};
    return report;
}

ExperimentReport run_strip_jump_sweep(const std::vector<double>& a_values,
                                      const ExperimentConfig& config) {
    ExperimentConfig base = config;
    if (!base.stopping.f_target) base.stopping.f_target = 1e-10;
    if (!base.stopping.sigma_floor) base.stopping.sigma_floor = 1e-250;
    if (!base.stopping.divergence_radius) base.stopping.divergence_radius = 1e6;

    ExperimentReport report;
    report.suite = "strip_jump_sweep";
    report.config_echo = to_json(base);

    double tau = base.params.tau();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double a : a_values) {
        ExperimentConfig c = base;
        c.objective_spec = "sphere_jump:variant=strip,a=" + fmt(a);
        c.m0 = vec{static_cast<real>(a) + 1e-3L, 1.0L};
        report.groups.push_back(run_group("a=" + fmt(a), c));
        const auto& g = report.groups.back();
        double rate = std::atan(a) / (2.0 * std::numbers::pi);
        rows.push_back({{"a", a},
                        {"corner_rate", rate},
                        {"predicted_regime", rate > tau ? "converge" : "stall_possible"},
                        {"converged", group_count(g, Outcome::ConvergedToOptimum)},
                        {"stalled", group_count(g, Outcome::Stalled)},
                        {"budget_exhausted", group_count(g, Outcome::BudgetExhausted)}});
    }
    report.summary = {{"tau", tau}, {"rows", rows}};
    return report;
}

ExperimentReport run_occupancy(const ExperimentConfig& config, const OccupancyOptions& options) {
    ExperimentConfig c = config;
    if (c.objective_spec.empty()) c.objective_spec = "sphere:d=2";
    objectives::Objective objective = objectives::make_objective(c.objective_spec);
    if (c.m0.empty()) {
        c.m0 = vec(objective.dim, 0.0L);
        c.m0[0] = 1.0L;
    }

    ExperimentReport report;
    report.suite = "occupancy";
    report.config_echo = to_json(c);
    report.config_echo["p_T"] = options.p_T;
    report.config_echo["p_H"] = options.p_H;
    report.config_echo["probe_stride"] = options.probe_stride;

    // One-time normalized thresholds at the unit probe; the sphere's scale
    // invariance turns them into bands xi_hat ||m|| <= sigma <= eta_hat ||m||.
    vec unit(objective.dim, 0.0L);
    unit[0] = 1.0L;
    auto xi = estimators::estimate_xi(unit, options.p_T, objective, estimators::SigmaGrid{},
                                      options.n_per_point, Rng::mix(c.master_seed) + 101, c.jobs);
    auto eta = estimators::estimate_eta(unit, options.p_H, objective, estimators::SigmaGrid{},
                                        options.n_per_point, Rng::mix(c.master_seed) + 202, c.jobs);
    bool degenerate = !(xi.value < eta.value) || std::isnan(xi.value) || std::isnan(eta.value);

    EsState init;
    init.m = c.m0;
    init.log_sigma = std::log(c.sigma0);
    RunTrace trace = es_run(objective, c.params, std::move(init), c.stopping,
                            replicate_seed(c.master_seed, 0), options.probe_stride);

    long long probes = 0, in_band = 0, re_entries = 0, first_entry = -1;
    long long excursion = 0, max_excursion = 0;
    bool inside_prev = false;
    double log_xi = std::log(xi.value), log_eta = std::log(eta.value);
    for (const auto& r : trace.records) {
        real nm2 = 0.0L;
        for (real mi : r.m_before) nm2 += mi * mi;
        bool inside = false;
        if (!degenerate && nm2 > 0.0L) {
            double log_norm = 0.5 * static_cast<double>(std::log(nm2));
            inside = r.log_sigma_before >= log_xi + log_norm &&
                     r.log_sigma_before <= log_eta + log_norm;
        }
        ++probes;
        if (inside) {
            ++in_band;
            excursion = 0;
            if (!inside_prev) {
                ++re_entries;
                if (first_entry < 0) first_entry = r.t;
            }
        } else {
            ++excursion;
            max_excursion = std::max(max_excursion, excursion);
        }
        inside_prev = inside;
    }

    GroupResult group;
    group.label = "run";
    group.config = c;
    group.objective_id = objective.id;
    ReplicateSummary s;
    s.index = 0;
    s.seed = trace.seed;
    s.outcome = trace.outcome;
    s.final_f = trace.final_f;
    s.final_log_sigma = trace.final_state.log_sigma;
    s.iterations = trace.iterations;
    s.stall_reason = trace.stall_reason;
    group.replicates.push_back(s);
    if (c.record_stride > 0) group.traces.push_back(std::move(trace));
    group.aggregates = outcome_aggregates(group.replicates);
    report.groups.push_back(std::move(group));

    report.summary = {{"xi_norm", xi.value},
                      {"xi_status", estimators::to_string(xi.status)},
                      {"eta_norm", eta.value},
                      {"eta_status", estimators::to_string(eta.status)},
                      {"band_degenerate", degenerate},
                      {"probes", probes},
                      {"in_band", in_band},
                      {"in_band_fraction",
                       probes > 0 ? static_cast<double>(in_band) / static_cast<double>(probes) : 0.0},
                      {"re_entries", re_entries},
                      {"max_excursion_probes", max_excursion},
                      {"first_entry_iteration", first_entry}};
    return report;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["suite"] = report.suite;
    j["config"] = report.config_echo;
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const auto& g : report.groups) {
        nlohmann::ordered_json gj;
        gj["label"] = g.label;
        gj["objective"] = g.objective_id;
        gj["config"] = to_json(g.config);
        gj["aggregates"] = g.aggregates;
        nlohmann::ordered_json reps = nlohmann::ordered_json::array();
        for (const auto& r : g.replicates) {
            reps.push_back({{"replicate", r.index},
                            {"seed", r.seed},
                            {"outcome", to_string(r.outcome)},
                            {"final_f", r.final_f},
                            {"final_log_sigma", r.final_log_sigma},
                            {"iterations", r.iterations},
                            {"stall_reason", r.stall_reason},
                            {"log_f_slope", r.log_f_slope}});
        }
        gj["replicates"] = reps;
        groups.push_back(gj);
    }
    j["groups"] = groups;
    j["summary"] = report.summary;
    return j;
}

std::string replicates_csv(const ExperimentReport& report) {
    std::string out = "suite,group,replicate,seed,outcome,final_f,final_log_sigma,iterations,"
                      "stall_reason\n";
    for (const auto& g : report.groups) {
        for (const auto& r : g.replicates) {
            out += report.suite + "," + g.label + "," + std::to_string(r.index) + "," +
                   std::to_string(r.seed) + "," + to_string(r.outcome) + "," +
                   serialize::csv_num(r.final_f) + "," + serialize::csv_num(r.final_log_sigma) +
                   "," + std::to_string(r.iterations) + "," + r.stall_reason + "\n";
        }
    }
    return out;
}

std::string long_csv(const ExperimentReport& report) {
    std::string out = "suite,group,replicate,t,f,sigma\n";
    for (const auto& g : report.groups) {
        for (std::size_t i = 0; i < g.traces.size(); ++i) {
            for (const auto& r : g.traces[i].records) {
                out += report.suite + "," + g.label + "," + std::to_string(i) + "," +
                       std::to_string(r.t) + "," + serialize::csv_num(r.f_parent) + "," +
                       serialize::csv_num(r.sigma_before) + "\n";
            }
        }
    }
    return out;
}

}  // namespace es::experiments
