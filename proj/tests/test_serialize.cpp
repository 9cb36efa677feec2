#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "es1p1/algorithm.hpp"
#include "es1p1/objectives.hpp"
#include "es1p1/serialize.hpp"

using namespace es;
using namespace es::serialize;

TEST_CASE("csv numbers use the shortest round-trip form", "[serialize]") {
    CHECK(csv_num(0.25) == "0.25");
    CHECK(csv_num(1.0) == "1");
    CHECK(csv_num(-3.5) == "-3.5");
    CHECK(csv_num(0.1) == "0.1");
    CHECK(csv_num(1e-250) == "1e-250");
    CHECK(csv_num(123456789.0) == "123456789");

    // Round-trip exactness for awkward doubles.
    for (double v : {0.1 + 0.2, 1.0 / 3.0, std::exp(1.0), -1e-300, 6.02e23}) {
        CHECK(std::stod(csv_num(v)) == v);
    }
    // Equal values always produce equal bytes.
    CHECK(csv_num(0.3) == csv_num(0.3));
}

TEST_CASE("EsParams round-trip and patch semantics", "[serialize]") {
    EsParams p;
    nlohmann::ordered_json j = to_json(p);
    CHECK(j["c_plus"].get<double>() == p.c_plus);
    CHECK(j["c_minus"].get<double>() == p.c_minus);
    CHECK_THAT(j["tau"].get<double>(), Catch::Matchers::WithinAbs(0.2, 1e-15));

    EsParams q = es_params_from_json(j);
    CHECK(q.c_plus == p.c_plus);
    CHECK(q.c_minus == p.c_minus);

    // Partial patch: only c_plus changes, c_minus comes from the base.
    EsParams base = EsParams::dimension_scaled(4);
    EsParams patched = es_params_from_json(nlohmann::json{{"c_plus", 1.5}}, base);
    CHECK(patched.c_plus == 1.5);
    CHECK(patched.c_minus == base.c_minus);
}

TEST_CASE("StoppingRule serializes optionals as values or null", "[serialize]") {
    StoppingRule s;
    s.max_iterations = 5000;
    s.f_target = 1e-8;
    nlohmann::ordered_json j = to_json(s);
    CHECK(j["max_iterations"].get<long long>() == 5000);
    CHECK(j["f_target"].get<double>() == 1e-8);
    CHECK(j["sigma_floor"].is_null());
    CHECK(j["divergence_radius"].is_null());

    StoppingRule r = stopping_from_json(j);
    CHECK(r.max_iterations == 5000);
    CHECK(r.f_target == s.f_target);
    CHECK_FALSE(r.sigma_floor.has_value());

    // An explicit null resets a field that the base had set.
    StoppingRule base;
    base.sigma_floor = 1e-100;
    StoppingRule cleared = stopping_from_json(nlohmann::json{{"sigma_floor", nullptr}}, base);
    CHECK_FALSE(cleared.sigma_floor.has_value());
    // An absent key keeps the base value.
    StoppingRule kept = stopping_from_json(nlohmann::json::object(), base);
    CHECK(kept.sigma_floor == base.sigma_floor);
}

namespace {

RunTrace short_trace() {
    auto sphere = objectives::make_objective("sphere:d=2");
    EsState init;
    init.m = vec{1.0L, 0.5L};
    init.log_sigma = std::log(0.3);
    StoppingRule stop;
    stop.max_iterations = 8;
    return es_run(sphere, EsParams{}, std::move(init), stop, 12345, 1);
}

}  // namespace

TEST_CASE("trace JSONL: meta line then one record per iteration", "[serialize]") {
    RunTrace t = short_trace();
    std::ostringstream out;
    write_trace_jsonl(t, out);
    std::istringstream in(out.str());
    std::string line;

    REQUIRE(std::getline(in, line));
    nlohmann::json meta = nlohmann::json::parse(line);
    CHECK(meta["objective"] == "sphere:d=2");
    CHECK(meta["seed"].get<std::uint64_t>() == 12345);
    CHECK(meta["iterations"].get<long long>() == 8);
    CHECK(meta["outcome"] == "BudgetExhausted");
    CHECK(meta["stopping"]["max_iterations"].get<long long>() == 8);
    CHECK(meta["final_m"].size() == 2);

    // Meta field order is pinned: downstream readers key on the first line.
    nlohmann::ordered_json ometa = trace_meta_json(t);
    const char* meta_keys[] = {"objective",       "params",          "seed",
                               "stopping",        "record_stride",   "iterations",
                               "final_m",         "final_log_sigma", "final_f",
                               "trailing_rejections", "outcome",     "stall_reason"};
    std::size_t k = 0;
    for (const auto& [key, value] : ometa.items()) {
        REQUIRE(k < std::size(meta_keys));
        CHECK(key == meta_keys[k]);
        ++k;
    }

    int n_records = 0;
    long long expected_t = 0;
    while (std::getline(in, line)) {
        nlohmann::json rec = nlohmann::json::parse(line);
        CHECK(rec["t"].get<long long>() == expected_t++);
        CHECK(rec["m_before"].size() == 2);
        CHECK(rec["x"].size() == 2);
        CHECK(rec["accepted"].is_boolean());
        ++n_records;
    }
    CHECK(n_records == 8);

    // Record field order is pinned too.
    nlohmann::ordered_json orec = to_json(t.records[0]);
    const char* rec_keys[] = {"t",           "m_before",   "sigma_before",
                              "x",           "f_parent",   "f_offspring",
                              "accepted",    "sigma_after", "log_sigma_before",
                              "log_sigma_after"};
    k = 0;
    for (const auto& [key, value] : orec.items()) {
        REQUIRE(k < std::size(rec_keys));
        CHECK(key == rec_keys[k]);
        ++k;
    }
}

TEST_CASE("trace CSV: header and the state entering each iteration", "[serialize]") {
    RunTrace t = short_trace();
    std::ostringstream out;
    write_trace_csv(t, out);
    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,m0,m1,sigma,f,accepted");

    REQUIRE(std::getline(in, line));
    // First data row is the initial state: m = (1, 0.5), sigma = 0.3, f = 1.25.
    CHECK(line.rfind("0,1,0.5,", 0) == 0);
    CHECK(line.find(",1.25,") != std::string::npos);
    char last = line.back();
    CHECK((last == '0' || last == '1'));

    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 8);
}

TEST_CASE("identical traces dump to identical bytes", "[serialize]") {
    RunTrace a = short_trace();
    RunTrace b = short_trace();
    std::ostringstream ja, jb, ca, cb;
    write_trace_jsonl(a, ja);
    write_trace_jsonl(b, jb);
    write_trace_csv(a, ca);
    write_trace_csv(b, cb);
    CHECK(ja.str() == jb.str());
    CHECK(ca.str() == cb.str());
}

TEST_CASE("dump produces canonical newline-terminated JSON", "[serialize]") {
    nlohmann::ordered_json j = {{"b", 1}, {"a", 2}};
    std::string s = dump(j);
    CHECK(s == "{\n  \"b\": 1,\n  \"a\": 2\n}\n");  // insertion order, 2-space indent
    CHECK(dump(j) == s);
}
