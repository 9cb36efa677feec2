#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "es1p1/objectives.hpp"
#include "es1p1/rng.hpp"

namespace es {

// Multiplicative step-size update constants. The success-rate target
// tau = c_minus / (c_minus - c_plus) is derived, never stored.
struct EsParams {
    double c_plus = 0.6931471805599453;    // ln 2
    double c_minus = -0.17328679513998632; // -ln 2 / 4  (1/5-rule: c+ + 4c- = 0)

    double tau() const { return c_minus / (c_minus - c_plus); }

    // Dimension-scaled preset with the same tau = 1/5.
    static EsParams dimension_scaled(std::size_t d) {
        return EsParams{2.0 / static_cast<double>(d), -0.5 / static_cast<double>(d)};
    }
};

// Algorithm state. sigma is tracked in log space so that decay below the
// double range is still observable; sigma() materializes it in extended
// precision (0 once even that underflows).
struct EsState {
    vec m;
    double log_sigma = 0.0;
    long long t = 0;

    real sigma() const;
};

enum class Outcome { ConvergedToOptimum, Diverged, Stalled, BudgetExhausted };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct StoppingRule {
    long long max_iterations = 100000;                 // required
    std::optional<double> f_target;                    // stop when f(m) <= target
    std::optional<double> sigma_floor;                 // stall floor
    std::optional<double> divergence_radius;           // trips on ||m|| or -f(m)
};

// One iteration of the run, recorded before/after the update.
struct StepRecord {
    long long t = 0;
    vec m_before;
    double sigma_before = 0.0;
    vec x;                     // offspring
    double f_parent = 0.0;
    double f_offspring = 0.0;
    bool accepted = false;
    double sigma_after = 0.0;
    double log_sigma_before = 0.0;
    double log_sigma_after = 0.0;
};

struct RunTrace {
    EsParams params;
    std::string objective_id;
    std::uint64_t seed = 0;
    StoppingRule stopping;
    long long record_stride = 1;       // keep every stride-th record (0 = none)
    std::vector<StepRecord> records;
    EsState final_state;
    double final_f = 0.0;
    long long iterations = 0;
    long long trailing_rejections = 0;
    Outcome outcome = Outcome::BudgetExhausted;
    std::string stall_reason;          // "rejection_streak" / "f_stagnation" / ""
};

// Offspring sampling: x = m + sigma z, z ~ N(0, I). The z-overload is the
// deterministic core used by tests and coupled estimators.
vec sample_offspring(const EsState& state, const vec& z);
vec sample_offspring(const EsState& state, Rng& rng);

struct StepResult {
    StepRecord record;
    bool accepted = false;
    real f_after = 0.0L;  // exact objective value of the post-step parent
};

// One elitist step against a fixed offspring (deterministic core) or a fresh
// sample. Accepts on f(x) <= f(m) except when x rounds to exactly m, which is
// treated as a rejection: at that resolution the chance of a genuine success
// is what drove sigma there, and rounding must not manufacture progress.
// Throws std::runtime_error on non-finite objective values.
StepResult es_step_with(EsState& state, const objectives::Objective& objective, const vec& x,
                        const EsParams& params);
StepResult es_step(EsState& state, const objectives::Objective& objective, Rng& rng,
                   const EsParams& params);

RunTrace es_run(const objectives::Objective& objective, const EsParams& params, EsState initial,
                const StoppingRule& stopping, std::uint64_t seed, long long record_stride = 1);

// Final-state classification, also usable on truncated traces. Label priority:
// target/optimum hit, divergence, stall (sigma floor plus trailing-window
// evidence), budget.
Outcome classify_outcome(const RunTrace& trace, const objectives::Objective& objective);

}  // namespace es
