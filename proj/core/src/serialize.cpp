#include "es1p1/serialize.hpp"

#include <charconv>
#include <ostream>

namespace es::serialize {

namespace {

nlohmann::ordered_json vec_json(const vec& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (real x : v) a.push_back(static_cast<double>(x));
    return a;
}

}  // namespace

std::string csv_num(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

nlohmann::ordered_json to_json(const EsParams& params) {
    return {{"c_plus", params.c_plus}, {"c_minus", params.c_minus}, {"tau", params.tau()}};
}

EsParams es_params_from_json(const nlohmann::json& j, const EsParams& base) {
    EsParams p = base;
    if (j.contains("c_plus")) p.c_plus = j.at("c_plus").get<double>();
    if (j.contains("c_minus")) p.c_minus = j.at("c_minus").get<double>();
    return p;
}

nlohmann::ordered_json to_json(const StoppingRule& stopping) {
    nlohmann::ordered_json j;
    j["max_iterations"] = stopping.max_iterations;
    j["f_target"] = stopping.f_target ? nlohmann::ordered_json(*stopping.f_target)
                                      : nlohmann::ordered_json(nullptr);
    j["sigma_floor"] = stopping.sigma_floor ? nlohmann::ordered_json(*stopping.sigma_floor)
                                            : nlohmann::ordered_json(nullptr);
    j["divergence_radius"] = stopping.divergence_radius
                                 ? nlohmann::ordered_json(*stopping.divergence_radius)
                                 : nlohmann::ordered_json(nullptr);
    return j;
}

StoppingRule stopping_from_json(const nlohmann::json& j, const StoppingRule& base) {
    StoppingRule s = base;
    if (j.contains("max_iterations")) s.max_iterations = j.at("max_iterations").get<long long>();
    auto opt = [&](const char* key, std::optional<double>& slot) {
        if (!j.contains(key)) return;
        if (j.at(key).is_null())
            slot.reset();
        else
            slot = j.at(key).get<double>();
    };
    opt("f_target", s.f_target);
    opt("sigma_floor", s.sigma_floor);
    opt("divergence_radius", s.divergence_radius);
    return s;
}

nlohmann::ordered_json to_json(const StepRecord& r) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["m_before"] = vec_json(r.m_before);
    j["sigma_before"] = r.sigma_before;
    j["x"] = vec_json(r.x);
    j["f_parent"] = r.f_parent;
    j["f_offspring"] = r.f_offspring;
    j["accepted"] = r.accepted;
    j["sigma_after"] = r.sigma_after;
    j["log_sigma_before"] = r.log_sigma_before;
    j["log_sigma_after"] = r.log_sigma_after;
    return j;
}

nlohmann::ordered_json trace_meta_json(const RunTrace& trace) {
    nlohmann::ordered_json j;
    j["objective"] = trace.objective_id;
    j["params"] = to_json(trace.params);
    j["seed"] = trace.seed;
    j["stopping"] = to_json(trace.stopping);
    j["record_stride"] = trace.record_stride;
    j["iterations"] = trace.iterations;
    j["final_m"] = vec_json(trace.final_state.m);
    j["final_log_sigma"] = trace.final_state.log_sigma;
    j["final_f"] = trace.final_f;
    j["trailing_rejections"] = trace.trailing_rejections;
    j["outcome"] = to_string(trace.outcome);
    j["stall_reason"] = trace.stall_reason;
    return j;
}

void write_trace_jsonl(const RunTrace& trace, std::ostream& out) {
    out << trace_meta_json(trace).dump() << '\n';
    for (const auto& r : trace.records) out << to_json(r).dump() << '\n';
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    std::size_t d = trace.final_state.m.size();
    out << "t";
    for (std::size_t i = 0; i < d; ++i) out << ",m" << i;
    out << ",sigma,f,accepted\n";
    for (const auto& r : trace.records) {
        out << r.t;
        for (std::size_t i = 0; i < d; ++i)
            out << ',' << csv_num(static_cast<double>(r.m_before[i]));
        out << ',' << csv_num(r.sigma_before) << ',' << csv_num(r.f_parent) << ','
            << (r.accepted ? 1 : 0) << '\n';
    }
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace es::serialize
