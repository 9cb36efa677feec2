#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "es1p1/estimators.hpp"
#include "es1p1/objectives.hpp"

namespace es::checks {

using estimators::CompareMode;
using objectives::Objective;

// Result of one empirical bound check. slack is oriented so that
// pass <=> slack >= -tolerance regardless of the bound's direction.
struct BoundCheckReport {
    std::string check_id;
    nlohmann::ordered_json inputs;
    double statistic = 0.0;      // primary empirical quantity
    double statistic_ci = 0.0;   // its 95% halfwidth (0 when not applicable)
    double bound = 0.0;          // theoretical reference value
    double slack = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    long long n = 0;
    std::uint64_t seed = 0;
    nlohmann::ordered_json details;
};

// Plateau structure of the offspring distribution at (m, sigma): per-level
// sampling frequencies and the resulting zeta = sum of squared level masses.
struct PlateauStats {
    struct Level {
        double value = 0.0;      // objective value of the level
        long long count = 0;
        double prob = 0.0;       // P(f(x) = value)
        double r_less = 0.0;     // P(f(x) < value)
        double r_leq = 0.0;      // P(f(x) <= value)
    };
    std::vector<Level> levels;
    double zeta = 0.0;
    double level_mass_at_m = 0.0;   // Lambda(L_f(m))
    double density_sup = 0.0;       // u = (2 pi)^{-d/2} sigma^{-d}
    int merged_levels = 0;          // levels below the min-hit threshold
};

// Expected one-step suboptimality decrease against the Gaussian closed-form
// bound (plateau-free objectives with an analytic sub-level volume):
//   E[max{0, fhat(m) - fhat(x)}] >= (2 pi)^{d/2} sigma^d p^2 / 2.
BoundCheckReport check_expected_decrease(const vec& m, double sigma, const Objective& objective,
                                         long long n, std::uint64_t seed);

// Quantile form of the same bound: for q in q_fracs * p,
//   P(fhat(m) - fhat(x) >= (2 pi)^{d/2} sigma^d (p - q)) >= q.
BoundCheckReport check_quantile_bound(const vec& m, double sigma, const Objective& objective,
                                      long long n, std::uint64_t seed,
                                      std::vector<double> q_fracs = {0.1, 0.5, 0.9});

// Plateaued-objective decrease bounds, strict and weak forms, with the
// empirical level decomposition (requires analytic strict/weak sub-level
// volumes and level masses, i.e. stepped_sphere).
BoundCheckReport check_plateau_decrease(const vec& m, double sigma, const Objective& objective,
                                        long long n, std::uint64_t seed, long long min_level_hits = 30);

// Step-size scaling lemma p(m, a sigma) >= a^{-d} p(m, sigma) for a >= 1,
// estimated with coupled samples (a = 1 reproduces equality bit-for-bit).
BoundCheckReport check_step_scaling(const vec& m, double sigma, double a,
                                    const Objective& objective, long long n, std::uint64_t seed,
                                    CompareMode mode = CompareMode::strict);

// Success-probability upper bound: sigma >= (fhat(m) / (p (2 pi)^{d/2}))^{1/d}
// implies p^<(m, sigma) <= p. Uses the analytic sub-level volume when
// available, otherwise a Monte Carlo volume (upper CI, conservative).
BoundCheckReport check_sigma_upper_bound(const vec& m, double p, const Objective& objective,
                                         long long n, std::uint64_t seed);

// Interleaving of the step-size thresholds for p_H <= p_T:
//   p_H^{1/d} xi_{p_T}(x) <= p_T^{1/d} eta_{p_H}(x).
BoundCheckReport check_gap(const vec& m, double p_T, double p_H, const Objective& objective,
                           estimators::SigmaGrid grid, long long n_per_point, std::uint64_t seed,
                           int jobs = 1);

// Small-sigma success limit at a regular (or exactly scale-invariant) point:
// p^<(x, sigma) -> target as sigma -> 0, default target 1/2.
BoundCheckReport check_regular_limit(const vec& x, const Objective& objective,
                                     std::vector<double> sigmas, long long n, std::uint64_t seed,
                                     double target = 0.5);

// Closed-form success rates of the case-study geometries.
//   quadratic_saddle: 2 acot(sqrt(a)) / pi     (at the origin, any sigma)
//   linear_ridge:     acot(a) / pi             (at the origin, any sigma)
//   jump_corner:      atan(a) / (2 pi)         (at the strip corner, sigma -> 0)
double case_study_rate(const std::string& kind, double a);

// Monte Carlo verification of case_study_rate at the canonical probe point.
BoundCheckReport check_case_study_rate(const std::string& kind, double a, long long n,
                                       std::uint64_t seed);

nlohmann::ordered_json to_json(const BoundCheckReport& report);
nlohmann::ordered_json to_json(const PlateauStats& stats);

}  // namespace es::checks
