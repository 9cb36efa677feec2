#include "es1p1/algorithm.hpp"

#include <cmath>
#include <stdexcept>

namespace es {

namespace {

constexpr long long kStallWindow = 1000;
constexpr double kStagnationRel = 1e-12;

real norm(const vec& x) {
    real s = 0.0L;
    for (real xi : x) s += xi * xi;
    return std::sqrt(s);
}

real checked_eval(const objectives::Objective& objective, const vec& x, long long t) {
    real f = objective.evaluate(x);
    if (!std::isfinite(f))
        throw std::runtime_error("objective '" + objective.id +
                                 "' returned a non-finite value at iteration " +
                                 std::to_string(t));
    return f;
}

}  // namespace

real EsState::sigma() const { return std::exp(static_cast<real>(log_sigma)); }

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::ConvergedToOptimum: return "ConvergedToOptimum";
        case Outcome::Diverged: return "Diverged";
        case Outcome::Stalled: return "Stalled";
        case Outcome::BudgetExhausted: return "BudgetExhausted";
    }
    return "BudgetExhausted";
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "ConvergedToOptimum") return Outcome::ConvergedToOptimum;
    if (s == "Diverged") return Outcome::Diverged;
    if (s == "Stalled") return Outcome::Stalled;
    if (s == "BudgetExhausted") return Outcome::BudgetExhausted;
    throw std::invalid_argument("unknown outcome label '" + s + "'");
}

vec sample_offspring(const EsState& state, const vec& z) {
    real sigma = state.sigma();
    vec x(state.m.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = state.m[i] + sigma * static_cast<real>(z[i]);
    return x;
}

vec sample_offspring(const EsState& state, Rng& rng) {
    vec z(state.m.size());
    rng.normal_fill(z);
    return sample_offspring(state, z);
}

StepResult es_step_with(EsState& state, const objectives::Objective& objective, const vec& x,
                        const EsParams& params) {
    StepRecord rec;
    rec.t = state.t;
    rec.m_before = state.m;
    rec.log_sigma_before = state.log_sigma;
    rec.sigma_before = static_cast<double>(state.sigma());
    rec.x = x;

    real f_parent = checked_eval(objective, state.m, state.t);
    real f_offspring = checked_eval(objective, x, state.t);
    rec.f_parent = static_cast<double>(f_parent);
    rec.f_offspring = static_cast<double>(f_offspring);

    // Weak elitist acceptance; an offspring that rounded back onto the parent
    // is never a success (see README: it only happens once sigma is below the
    // representable resolution at m).
    bool accepted = f_offspring <= f_parent && x != state.m;
    if (accepted) {
        state.m = x;
        state.log_sigma += params.c_plus;
    } else {
        state.log_sigma += params.c_minus;
    }
    state.t += 1;

    rec.accepted = accepted;
    rec.log_sigma_after = state.log_sigma;
    rec.sigma_after = static_cast<double>(state.sigma());
    return StepResult{rec, accepted, accepted ? f_offspring : f_parent};
}

StepResult es_step(EsState& state, const objectives::Objective& objective, Rng& rng,
                   const EsParams& params) {
    return es_step_with(state, objective, sample_offspring(state, rng), params);
}

RunTrace es_run(const objectives::Objective& objective, const EsParams& params, EsState initial,
                const StoppingRule& stopping, std::uint64_t seed, long long record_stride) {
    RunTrace trace;
    trace.params = params;
    trace.objective_id = objective.id;
    trace.seed = seed;
    trace.stopping = stopping;
    trace.record_stride = record_stride;

    EsState state = std::move(initial);
    state.t = 0;
    Rng rng(seed);

    const double log_floor =
        stopping.sigma_floor ? std::log(*stopping.sigma_floor) : 0.0;
    std::vector<double> f_ring(kStallWindow + 1, 0.0);
    long long consecutive_rejections = 0;

    real f_now = checked_eval(objective, state.m, 0);

    for (long long i = 0; i < stopping.max_iterations; ++i) {
        StepResult step = es_step(state, objective, rng, params);
        if (record_stride > 0 && step.record.t % record_stride == 0)
            trace.records.push_back(step.record);

        consecutive_rejections = step.accepted ? 0 : consecutive_rejections + 1;
        f_now = step.f_after;
        f_ring[static_cast<std::size_t>(i % (kStallWindow + 1))] = static_cast<double>(f_now);

        if (stopping.f_target && static_cast<double>(f_now) <= *stopping.f_target) break;
        if (stopping.divergence_radius) {
            real r = static_cast<real>(*stopping.divergence_radius);
            if (norm(state.m) >= r || -f_now >= r) break;
        }
        if (stopping.sigma_floor && state.log_sigma < log_floor) {
            if (consecutive_rejections >= kStallWindow) {
                trace.stall_reason = "rejection_streak";
                break;
            }
            if (i >= kStallWindow) {
                double f_old = f_ring[static_cast<std::size_t>((i - kStallWindow) % (kStallWindow + 1))];
                double f_cur = static_cast<double>(f_now);
                if (f_old - f_cur <= kStagnationRel * (1.0 + std::fabs(f_cur))) {
                    trace.stall_reason = "f_stagnation";
                    break;
                }
            }
        }
    }

    trace.final_state = state;
    trace.final_f = static_cast<double>(f_now);
    trace.iterations = state.t;
    trace.trailing_rejections = consecutive_rejections;
    trace.outcome = classify_outcome(trace, objective);
    return trace;
}

Outcome classify_outcome(const RunTrace& trace, const objectives::Objective& objective) {
    const auto& stop = trace.stopping;
    if (stop.f_target && trace.final_f <= *stop.f_target) return Outcome::ConvergedToOptimum;
    if (objective.optimum) {
        vec diff = trace.final_state.m;
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= (*objective.optimum)[i];
        if (norm(diff) <= static_cast<real>(objective.optimum_tolerance))
            return Outcome::ConvergedToOptimum;
    }
    if (stop.divergence_radius) {
        real r = static_cast<real>(*stop.divergence_radius);
        if (norm(trace.final_state.m) >= r || -static_cast<real>(trace.final_f) >= r)
            return Outcome::Diverged;
    }
    if (stop.sigma_floor && trace.final_state.log_sigma < std::log(*stop.sigma_floor)) {
        if (trace.trailing_rejections >= kStallWindow || trace.stall_reason == "f_stagnation")
            return Outcome::Stalled;
    }
    return Outcome::BudgetExhausted;
}

}  // namespace es
