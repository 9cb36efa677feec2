#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "es1p1/objectives.hpp"
#include "es1p1/rng.hpp"

namespace es::estimators {

using objectives::Objective;

// Whether comparisons against the reference value use {f < f0} or {f <= f0}.
enum class CompareMode { strict, weak };
std::string to_string(CompareMode m);
CompareMode compare_mode_from_string(const std::string& s);

struct Wilson {
    double lo = 0.0, hi = 1.0;
};
// 95% Wilson score interval for a binomial proportion.
Wilson wilson_interval(long long successes, long long n);

struct EstimationResult {
    double estimate = 0.0;
    double ci_halfwidth = 0.0;   // (ci_hi - ci_lo) / 2
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long long n = 0;
    std::uint64_t seed = 0;
    bool boundary_flag = false;  // volume estimates: improving mass touches the box
};

// One-step success probability p(m, sigma) = P(f(m + sigma z) {<,<=} f(m)).
// Samples are drawn in fixed-size batches with per-batch substreams, so the
// result is independent of the number of worker threads.
EstimationResult estimate_success_prob(const vec& m, double sigma, const Objective& objective,
                                       long long n, CompareMode mode, std::uint64_t seed,
                                       int jobs = 1);

// Box-relative sub-level volume  Lambda({f {<,<=} f(x)} ∩ bounding box)  by
// hit-or-miss sampling over objective.bounding_box. boundary_flag is set when
// improving samples land within 0.5% of a box face, signalling that the
// sub-level set likely extends beyond the box.
EstimationResult estimate_suboptimality(const vec& x, const Objective& objective, long long n,
                                        std::uint64_t seed, CompareMode mode = CompareMode::strict,
                                        int jobs = 1);

struct SigmaGrid {
    double lo = 0.0, hi = 0.0;  // 0 means "derive the default from the probe point"
    int points = 41;
};
SigmaGrid default_sigma_grid(const vec& m);

enum class RangeStatus { ok, at_grid_floor, at_grid_ceiling, empty_set, inconclusive };
std::string to_string(RangeStatus s);

// Directional estimate of the step-size thresholds
//   xi_p(m)  = inf{ sigma : p^<(m, sigma) <= p }
//   eta_p(m) = sup{ sigma : p^<=(m, sigma) >= p }
// Grid scans run upward (xi) / downward (eta) so that non-monotone success
// curves bias the estimate conservatively (xi from above, eta from below),
// followed by log-space bisection. value is +inf (xi, empty set) or 0 (eta,
// empty set) when no grid point qualifies and none straddles.
struct SigmaRangeEstimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double resolution = 0.0;  // width of the final bracketing interval
    double p = 0.0;
    SigmaGrid grid;
    RangeStatus status = RangeStatus::inconclusive;
    long long n_per_point = 0;
    std::uint64_t seed = 0;
};

SigmaRangeEstimate estimate_xi(const vec& m, double p, const Objective& objective,
                               SigmaGrid grid, long long n_per_point, std::uint64_t seed,
                               int jobs = 1);
SigmaRangeEstimate estimate_eta(const vec& m, double p, const Objective& objective,
                                SigmaGrid grid, long long n_per_point, std::uint64_t seed,
                                int jobs = 1);

// Weighted log-log fit of the success probability decay p(m, sigma) ~ sigma^s
// over a geometric sigma grid spanning >= 3 decades. Grid points with zero
// observed successes are dropped from the fit and counted.
struct ExponentRow {
    double sigma = 0.0;
    double p_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    long long successes = 0;
};
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // weighted RMS residual in log space
    int points_used = 0;
    int points_dropped = 0;
    std::vector<ExponentRow> rows;
    long long n_per_point = 0;
    std::uint64_t seed = 0;
};

ExponentFit estimate_success_exponent(const vec& m, const Objective& objective, double sigma_lo,
                                      double sigma_hi, int points, long long n_per_point,
                                      CompareMode mode, std::uint64_t seed, int jobs = 1);

}  // namespace es::estimators
