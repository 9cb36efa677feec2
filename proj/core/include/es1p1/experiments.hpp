#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "es1p1/algorithm.hpp"
#include "es1p1/objectives.hpp"

namespace es::experiments {

// Replicated-run configuration. Suites fill in their own defaults; a JSON
// config patch (CLI --config) overrides fields selectively.
struct ExperimentConfig {
    std::string objective_spec;      // empty = suite default
    EsParams params;
    vec m0;
    double sigma0 = 1.0;
    int replicates = 100;
    StoppingRule stopping;
    std::uint64_t master_seed = 20240601;
    long long record_stride = 0;     // thinning for the long CSV (0 = none kept)
    int jobs = 1;
};

nlohmann::ordered_json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);

std::uint64_t replicate_seed(std::uint64_t master_seed, int replicate_index);

struct ReplicateSummary {
    int index = 0;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::BudgetExhausted;
    double final_f = 0.0;
    double final_log_sigma = 0.0;
    long long iterations = 0;
    std::string stall_reason;
    double log_f_slope = 0.0;        // per-iteration slope of ln f (0 when n/a)
};

// One homogeneous batch of replicates (fixed objective/init), plus the
// aggregate table: outcome counts with Wilson CIs, median iterations of the
// converged replicates, median log-f slope.
struct GroupResult {
    std::string label;
    ExperimentConfig config;
    std::string objective_id;
    std::vector<ReplicateSummary> replicates;
    std::vector<RunTrace> traces;    // stride-thinned; empty when stride = 0
    nlohmann::ordered_json aggregates;
};

struct ExperimentReport {
    std::string suite;
    nlohmann::ordered_json config_echo;
    std::vector<GroupResult> groups;
    nlohmann::ordered_json summary;
};

// Runs config.replicates independent runs of the configured objective with
// per-replicate substream seeds; deterministic for any jobs count.
GroupResult run_group(const std::string& label, const ExperimentConfig& config);

// Target-hitting statistics on a fixed objective (defaults: f_target 1e-10,
// budget 1e5, sigma0 1, m0 = (-2, 2)).
ExperimentReport run_convergence_suite(const ExperimentConfig& config);

// Median convergence rate of ln f on sphere:d for each d, with rate ratios
// relative to the smallest dimension.
ExperimentReport run_rate_vs_dimension(const std::vector<int>& dims,
                                       const ExperimentConfig& config);

// Fraction of replicates descending past the quadratic saddle (f <= -1)
// from m0 = (0.1, 0).
ExperimentReport run_saddle_traversal(const std::vector<double>& a_values,
                                      const ExperimentConfig& config);

// Stall frequency versus K where sigma0 = exp(K c_minus), for a premature-
// convergence scenario: cubic_saddle (origin), jump_closed_ball (3/2 e1), or
// fat_cantor (m0 = 1e-3, depth-60 barrier). config.objective_spec overrides
// the scenario objective (e.g. the null-measure Cantor variant).
ExperimentReport run_premature_suite(const std::string& scenario, const std::vector<int>& k_values,
                                     const ExperimentConfig& config);

// Diverged/Stalled regime split of the linear ridge from m0 = (0, 1).
ExperimentReport run_ridge_sweep(const std::vector<double>& a_values,
                                 const ExperimentConfig& config);

// Converged/Stalled regime split of the strip jump from the corner init.
ExperimentReport run_strip_jump_sweep(const std::vector<double>& a_values,
                                      const ExperimentConfig& config);

// Band occupancy of sigma_t relative to [xi_hat ||m||, eta_hat ||m||] on the
// sphere, using one normalized xi/eta estimate rescaled by ||m_t||.
struct OccupancyOptions {
    double p_T = 0.35;
    double p_H = 0.05;
    long long probe_stride = 10;
    long long n_per_point = 20000;
};
ExperimentReport run_occupancy(const ExperimentConfig& config, const OccupancyOptions& options);

nlohmann::ordered_json to_json(const ExperimentReport& report);

// Per-replicate summary CSV (one row per replicate across all groups) and
// plot-ready long CSV (one row per recorded iteration).
std::string replicates_csv(const ExperimentReport& report);
std::string long_csv(const ExperimentReport& report);

}  // namespace es::experiments
