#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "es1p1/experiments.hpp"
#include "es1p1/serialize.hpp"

using namespace es;
using namespace es::experiments;

namespace {

double outcome_freq(const nlohmann::ordered_json& aggregates, const char* label) {
    return aggregates["outcomes"][label]["frequency"].get<double>();
}

}  // namespace

TEST_CASE("replicate seeds are deterministic substream states", "[experiments]") {
    CHECK(replicate_seed(20240601, 0) == replicate_seed(20240601, 0));
    CHECK(replicate_seed(20240601, 0) == Rng::substream(20240601, 0).state);

    // No collisions across a realistic replicate range.
    std::vector<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.push_back(replicate_seed(99, i));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("experiment config round-trips through JSON", "[experiments]") {
    ExperimentConfig c;
    c.objective_spec = "linear_ridge:a=4";
    c.params = EsParams::dimension_scaled(4);
    c.m0 = vec{0.5L, -1.5L};
    c.sigma0 = 0.25;
    c.replicates = 17;
    c.stopping.max_iterations = 4321;
    c.stopping.f_target = 1e-9;
    c.stopping.sigma_floor = 1e-200;
    c.stopping.divergence_radius = 1e5;
    c.master_seed = 777;
    c.record_stride = 16;
    c.jobs = 3;

    ExperimentConfig r = config_from_json(to_json(c), ExperimentConfig{});
    CHECK(r.objective_spec == c.objective_spec);
    CHECK(r.params.c_plus == c.params.c_plus);
    CHECK(r.params.c_minus == c.params.c_minus);
    CHECK(r.m0 == c.m0);
    CHECK(r.sigma0 == c.sigma0);
    CHECK(r.replicates == c.replicates);
    CHECK(r.stopping.max_iterations == 4321);
    CHECK(r.stopping.f_target == c.stopping.f_target);
    CHECK(r.stopping.sigma_floor == c.stopping.sigma_floor);
    CHECK(r.stopping.divergence_radius == c.stopping.divergence_radius);
    CHECK(r.master_seed == 777);
    CHECK(r.record_stride == 16);
    CHECK(r.jobs == 3);

    // Patches apply selectively on top of a base.
    ExperimentConfig patched = config_from_json(nlohmann::json{{"sigma0", 9.0}}, c);
    CHECK(patched.sigma0 == 9.0);
    CHECK(patched.objective_spec == c.objective_spec);
    CHECK(patched.replicates == 17);
}

TEST_CASE("run_group validates its inputs", "[experiments]") {
    ExperimentConfig c;
    c.objective_spec = "sphere:d=2";
    c.m0 = vec{1.0L};  // wrong dimension
    CHECK_THROWS_AS(run_group("bad", c), std::invalid_argument);
    c.m0 = vec{1.0L, 0.0L};
    c.sigma0 = 0.0;
    CHECK_THROWS_AS(run_group("bad", c), std::invalid_argument);
}

TEST_CASE("run_group results do not depend on the worker count", "[experiments]") {
    ExperimentConfig c;
    c.objective_spec = "sphere:d=2";
    c.m0 = vec{-2.0L, 2.0L};
    c.replicates = 12;
    c.stopping.max_iterations = 3000;
    c.stopping.f_target = 1e-10;
    c.jobs = 1;
    GroupResult serial = run_group("g", c);
    c.jobs = 8;
    GroupResult parallel = run_group("g", c);

    REQUIRE(serial.replicates.size() == parallel.replicates.size());
    for (std::size_t i = 0; i < serial.replicates.size(); ++i) {
        const auto& a = serial.replicates[i];
        const auto& b = parallel.replicates[i];
        CHECK(a.seed == b.seed);
        CHECK(a.outcome == b.outcome);
        CHECK(a.final_f == b.final_f);
        CHECK(a.final_log_sigma == b.final_log_sigma);
        CHECK(a.iterations == b.iterations);
        CHECK(a.log_f_slope == b.log_f_slope);
    }
    CHECK(serialize::dump(serial.aggregates) == serialize::dump(parallel.aggregates));
}

TEST_CASE("convergence suite: the sphere always reaches the target", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 10;
    c.jobs = 4;
    ExperimentReport r = run_convergence_suite(c);
    CHECK(r.suite == "convergence");
    CHECK(r.summary["converged"].get<long long>() == 10);
    // Suite defaults echoed back: sphere from (-2, 2) to f <= 1e-10.
    CHECK(r.config_echo["objective"] == "sphere:d=2");
    CHECK(r.config_echo["m0"][0].get<double>() == -2.0);
    CHECK(r.config_echo["stopping"]["f_target"].get<double>() == 1e-10);
    REQUIRE(r.groups.size() == 1);
    CHECK(outcome_freq(r.groups[0].aggregates, "ConvergedToOptimum") == 1.0);
    CHECK(r.groups[0].aggregates["median_iterations_converged"].get<double>() > 0.0);

    // The median per-iteration slope of ln f is strictly negative (linear
    // convergence), and the aggregate outcome frequencies sum to one.
    CHECK(r.groups[0].aggregates["median_log_f_slope"].get<double>() < -1e-3);
    double total = 0.0;
    for (const char* k : {"ConvergedToOptimum", "Diverged", "Stalled", "BudgetExhausted"})
        total += outcome_freq(r.groups[0].aggregates, k);
    CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("convergence suite handles the rosenbrock valley", "[experiments]") {
    ExperimentConfig c;
    c.objective_spec = "rosenbrock2d";
    c.replicates = 10;
    c.jobs = 4;
    ExperimentReport r = run_convergence_suite(c);
    CHECK(r.summary["converged"].get<long long>() >= 8);
}

TEST_CASE("suite reports are byte-identical across repeated runs", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 6;
    c.jobs = 4;
    std::string a = serialize::dump(to_json(run_convergence_suite(c)));
    std::string b = serialize::dump(to_json(run_convergence_suite(c)));
    CHECK(a == b);

    // And across worker counts, up to the echoed jobs field itself.
    c.jobs = 1;
    nlohmann::ordered_json serial = to_json(run_convergence_suite(c));
    c.jobs = 8;
    nlohmann::ordered_json parallel = to_json(run_convergence_suite(c));
    auto strip_jobs = [](nlohmann::ordered_json j) {
        j["config"].erase("jobs");
        for (auto& g : j["groups"]) g["config"].erase("jobs");
        return j;
    };
    CHECK(serialize::dump(strip_jobs(serial)) == serialize::dump(strip_jobs(parallel)));
}

TEST_CASE("rate-vs-dimension slows down in higher dimension", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 8;
    c.jobs = 4;
    c.stopping.f_target = 1e-10;
    ExperimentReport r = run_rate_vs_dimension({2, 8}, c);
    REQUIRE(r.summary["rows"].size() == 2);
    CHECK(r.summary["rows"][0]["d"].get<int>() == 2);
    CHECK(r.summary["rows"][0]["rate_ratio_vs_first"].get<double>() == 1.0);
    // ln f falls ~1/d per iteration: d = 8 needs several times longer.
    CHECK(r.summary["rows"][1]["rate_ratio_vs_first"].get<double>() > 1.5);

    CHECK_THROWS_AS(run_rate_vs_dimension({}, c), std::invalid_argument);
    CHECK_THROWS_AS(run_rate_vs_dimension({0}, c), std::invalid_argument);
}

TEST_CASE("saddle traversal: the balanced saddle is crossed", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 10;
    c.jobs = 4;
    ExperimentReport r = run_saddle_traversal({1.0}, c);
    CHECK(r.suite == "saddle_traversal");
    // Suite defaults: start (0.1, 0) with sigma0 = 0.02, target f <= -1.
    CHECK(r.config_echo["sigma0"].get<double>() == 0.02);
    CHECK(r.config_echo["stopping"]["f_target"].get<double>() == -1.0);
    const auto& row = r.summary["rows"][0];
    CHECK(row["rate_at_origin"].get<double>() == 0.5);
    CHECK(row["frequency"].get<double>() >= 0.5);
}

TEST_CASE("premature suite: small initial steps capture the fat Cantor run",
          "[experiments]") {
    ExperimentConfig c;
    c.replicates = 20;
    c.jobs = 8;
    c.params = EsParams::dimension_scaled(1);
    ExperimentReport r = run_premature_suite("fat_cantor", {0, 40}, c);
    CHECK(r.suite == "premature");
    CHECK(r.config_echo["scenario"] == "fat_cantor");
    CHECK(r.config_echo["objective"] == "cantor_barrier:variant=fat,depth=60");
    CHECK(r.config_echo["stopping"]["sigma_floor"].get<double>() == 1e-250);

    const auto& rows = r.summary["rows"];
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["K"].get<int>() == 0);
    CHECK(rows[0]["sigma0"].get<double>() == 1.0);
    CHECK_THAT(rows[1]["sigma0"].get<double>(),
               Catch::Matchers::WithinRel(std::exp(40.0 * c.params.c_minus), 1e-12));
    // Unit steps usually escape; tiny steps get trapped inside a removed gap.
    CHECK(rows[0]["frequency"].get<double>() <= 0.2);
    CHECK(rows[1]["frequency"].get<double>() >= 0.7);
    CHECK(rows[0]["frequency"].get<double>() < rows[1]["frequency"].get<double>());
    CHECK(rows[1]["ci_lo"].get<double>() > 0.0);
}

TEST_CASE("premature suite: the null Cantor variant never stalls", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 20;
    c.jobs = 8;
    c.params = EsParams::dimension_scaled(1);
    c.objective_spec = "cantor_barrier:variant=null,depth=60";
    ExperimentReport r = run_premature_suite("fat_cantor", {40}, c);
    CHECK(r.summary["rows"][0]["frequency"].get<double>() == 0.0);
    CHECK(outcome_freq(r.groups[0].aggregates, "Diverged") == 1.0);
}

TEST_CASE("premature suite: cubic saddle stalls from deep starts", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 20;
    c.jobs = 8;
    c.params = EsParams::dimension_scaled(2);
    ExperimentReport r = run_premature_suite("cubic_saddle", {40}, c);
    CHECK(r.config_echo["objective"] == "cubic_saddle");
    CHECK(r.summary["rows"][0]["frequency"].get<double>() >= 0.7);

    CHECK_THROWS_AS(run_premature_suite("quartic", {1}, c), std::invalid_argument);
}

TEST_CASE("ridge sweep: the shallow penalty diverges along the ridge", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 10;
    c.jobs = 4;
    ExperimentReport r = run_ridge_sweep({0.5, 20.0}, c);
    CHECK(r.summary["tau"].get<double>() > 0.19);
    const auto& rows = r.summary["rows"];
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["predicted_regime"] == "diverge");       // rate 0.35 > tau
    CHECK(rows[0]["diverged"].get<long long>() == 10);
    CHECK(rows[1]["predicted_regime"] == "stall_possible"); // rate 0.016 < tau
    CHECK(rows[1]["diverged"].get<long long>() == 0);
    // Defaults: start on the ridge at (0, 1).
    CHECK(r.config_echo["m0"][0].get<double>() == 0.0);
    CHECK(r.config_echo["m0"][1].get<double>() == 1.0);
}

TEST_CASE("strip-jump sweep: wide wedge converges, narrow wedge stalls",
          "[experiments]") {
    ExperimentConfig c;
    c.replicates = 10;
    c.jobs = 8;
    c.sigma0 = 1e-5;  // well below the corner offset, so the wedge rate governs
    c.stopping.max_iterations = 20000;
    ExperimentReport r = run_strip_jump_sweep({10.0, 0.5}, c);
    const auto& rows = r.summary["rows"];
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["predicted_regime"] == "converge");        // rate 0.234 > tau
    CHECK(rows[0]["converged"].get<long long>() == 10);
    CHECK(rows[1]["predicted_regime"] == "stall_possible");  // rate 0.074 < tau
    CHECK(rows[1]["stalled"].get<long long>() >= 5);
}

TEST_CASE("occupancy: sigma tracks the threshold band on the sphere", "[experiments]") {
    ExperimentConfig c;
    c.stopping.max_iterations = 10000;
    c.jobs = 4;
    OccupancyOptions opt;
    ExperimentReport r = run_occupancy(c, opt);
    CHECK(r.suite == "occupancy");
    CHECK_FALSE(r.summary["band_degenerate"].get<bool>());
    CHECK(r.summary["xi_norm"].get<double>() < r.summary["eta_norm"].get<double>());
    CHECK(r.summary["probes"].get<long long>() == 1000);  // 10000 / stride 10
    CHECK(r.summary["in_band_fraction"].get<double>() > 0.2);
    CHECK(r.summary["re_entries"].get<long long>() >= 5);
    CHECK(r.summary["first_entry_iteration"].get<long long>() >= 0);
}

TEST_CASE("experiment CSV artifacts have stable headers and shapes", "[experiments]") {
    ExperimentConfig c;
    c.replicates = 3;
    c.jobs = 1;
    c.record_stride = 50;
    c.stopping.max_iterations = 200;
    c.stopping.f_target = 1e-10;
    ExperimentReport r = run_convergence_suite(c);

    std::string reps = replicates_csv(r);
    CHECK(reps.rfind("suite,group,replicate,seed,outcome,final_f,final_log_sigma,"
                     "iterations,stall_reason\n", 0) == 0);
    CHECK(std::count(reps.begin(), reps.end(), '\n') == 4);  // header + 3 rows

    std::string lng = long_csv(r);
    CHECK(lng.rfind("suite,group,replicate,t,f,sigma\n", 0) == 0);
    // Each replicate records t = 0, 50, 100, 150 within the 200-step budget
    // (fewer if it converged first), so there are some data rows.
    CHECK(std::count(lng.begin(), lng.end(), '\n') >= 4);
    CHECK(lng.find("convergence,sphere:d=2,0,0,") != std::string::npos);

    // Without a record stride the long CSV is header-only.
    c.record_stride = 0;
    std::string empty_long = long_csv(run_convergence_suite(c));
    CHECK(empty_long == "suite,group,replicate,t,f,sigma\n");
}
