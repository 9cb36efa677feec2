#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "es1p1/estimators.hpp"
#include "es1p1/objectives.hpp"

using namespace es;
using namespace es::estimators;
using objectives::make_objective;
using objectives::Objective;

TEST_CASE("wilson interval matches reference values and clamps to [0,1]", "[estimators]") {
    Wilson w = wilson_interval(50, 100);
    CHECK_THAT(w.lo, Catch::Matchers::WithinAbs(0.4038315303659956, 1e-12));
    CHECK_THAT(w.hi, Catch::Matchers::WithinAbs(0.5961684696340044, 1e-12));

    // At the boundary counts, the closed form is exactly 0 (resp. 1) up to a
    // last-place rounding residue; the clamp guarantees the sign only.
    Wilson w0 = wilson_interval(0, 100);
    CHECK(w0.lo >= 0.0);
    CHECK_THAT(w0.lo, Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THAT(w0.hi, Catch::Matchers::WithinAbs(0.03699349820698568, 1e-12));

    Wilson w1 = wilson_interval(100, 100);
    CHECK_THAT(w1.lo, Catch::Matchers::WithinAbs(0.9630065017930143, 1e-12));
    CHECK(w1.hi <= 1.0);
    CHECK_THAT(w1.hi, Catch::Matchers::WithinAbs(1.0, 1e-15));

    Wilson w3 = wilson_interval(3, 10);
    CHECK_THAT(w3.lo, Catch::Matchers::WithinAbs(0.10779126740630099, 1e-12));
    CHECK_THAT(w3.hi, Catch::Matchers::WithinAbs(0.6032218525388546, 1e-12));

    Wilson empty = wilson_interval(0, 0);
    CHECK(empty.lo == 0.0);
    CHECK(empty.hi == 1.0);

    // Wider samples tighten the interval around the same proportion.
    Wilson small = wilson_interval(30, 100);
    Wilson large = wilson_interval(3000, 10000);
    CHECK(large.hi - large.lo < small.hi - small.lo);
}

TEST_CASE("success probability reproduces an exact cone rate", "[estimators]") {
    // The improving cone of a x1^2 - x2^2 at the origin has exact angular
    // measure for every sigma; a = 1 gives exactly 1/2.
    Objective half = make_objective("quadratic_saddle:a=1");
    vec origin{0.0L, 0.0L};
    EstimationResult r = estimate_success_prob(origin, 0.7, half, 100000,
                                               CompareMode::strict, 99, 4);
    CHECK_THAT(r.estimate, Catch::Matchers::WithinAbs(0.5, 0.007));
    CHECK(r.ci_lo <= r.estimate);
    CHECK(r.estimate <= r.ci_hi);
    CHECK(r.n == 100000);

    Objective steep = make_objective("quadratic_saddle:a=9");
    EstimationResult r9 = estimate_success_prob(origin, 0.02, steep, 100000,
                                                CompareMode::strict, 99, 4);
    CHECK_THAT(r9.estimate, Catch::Matchers::WithinAbs(0.20483276469913345, 0.006));
}

TEST_CASE("success probability tends to 1/2 at a regular point", "[estimators]") {
    Objective sphere = make_objective("sphere:d=2");
    vec m{1.0L, 0.0L};
    EstimationResult r = estimate_success_prob(m, 1e-6, sphere, 100000,
                                               CompareMode::strict, 7, 4);
    CHECK(r.estimate > 0.48);
    CHECK(r.estimate < 0.52);

    // Strict and weak comparisons agree where ties have measure zero.
    EstimationResult w = estimate_success_prob(m, 1e-6, sphere, 100000,
                                               CompareMode::weak, 7, 4);
    CHECK_THAT(w.estimate, Catch::Matchers::WithinAbs(r.estimate, 1e-9));
}

TEST_CASE("estimates are independent of the worker count", "[estimators]") {
    Objective sphere = make_objective("sphere:d=2");
    vec m{1.0L, 0.0L};
    // n deliberately not a multiple of the batch size.
    EstimationResult a = estimate_success_prob(m, 0.3, sphere, 12345,
                                               CompareMode::strict, 2024, 1);
    EstimationResult b = estimate_success_prob(m, 0.3, sphere, 12345,
                                               CompareMode::strict, 2024, 4);
    CHECK(a.estimate == b.estimate);
    CHECK(a.ci_lo == b.ci_lo);
    CHECK(a.ci_hi == b.ci_hi);

    EstimationResult va = estimate_suboptimality(m, sphere, 54321, 77,
                                                 CompareMode::strict, 1);
    EstimationResult vb = estimate_suboptimality(m, sphere, 54321, 77,
                                                 CompareMode::strict, 3);
    CHECK(va.estimate == vb.estimate);
    CHECK(va.boundary_flag == vb.boundary_flag);
}

TEST_CASE("sub-level volume of the sphere matches the disc area", "[estimators]") {
    Objective sphere = make_objective("sphere:d=2");
    vec m{1.0L, 0.0L};
    EstimationResult r = estimate_suboptimality(m, sphere, 200000, 11,
                                                CompareMode::strict, 4);
    double pi = 3.141592653589793;
    CHECK_THAT(r.estimate, Catch::Matchers::WithinAbs(pi, 0.06));  // ~4 SE
    CHECK(r.ci_lo < pi);
    CHECK(pi < r.ci_hi);
    CHECK_FALSE(r.boundary_flag);  // the disc stays far from the box faces

    // Against the analytic hook of the stepped sphere: strict volume at (1,0)
    // is the open disc r^2 <= 3/4.
    Objective stepped = make_objective("stepped_sphere:k=4,d=2");
    EstimationResult s = estimate_suboptimality(m, stepped, 200000, 12,
                                                CompareMode::strict, 4);
    double exact = static_cast<double>(stepped.suboptimality_strict(m));
    CHECK_THAT(s.estimate, Catch::Matchers::WithinAbs(exact, 0.05));
    EstimationResult sw = estimate_suboptimality(m, stepped, 200000, 12,
                                                 CompareMode::weak, 4);
    double exact_weak = static_cast<double>(stepped.suboptimality_weak(m));
    CHECK_THAT(sw.estimate, Catch::Matchers::WithinAbs(exact_weak, 0.05));
    CHECK(sw.estimate > s.estimate);  // the level annulus has positive mass
}

TEST_CASE("boundary flag fires when the sub-level set is clipped", "[estimators]") {
    Objective sphere = make_objective("sphere:d=2");
    vec near_edge{1.999L, 0.0L};
    EstimationResult r = estimate_suboptimality(near_edge, sphere, 100000, 5,
                                                CompareMode::strict, 4);
    CHECK(r.boundary_flag);
}

TEST_CASE("xi and eta report directional thresholds with statuses", "[estimators]") {
    SECTION("sphere: both thresholds interior to the default grid") {
        Objective sphere = make_objective("sphere:d=2");
        vec m{1.0L, 0.0L};
        SigmaRangeEstimate xi = estimate_xi(m, 0.4, sphere, SigmaGrid{}, 20000, 21, 4);
        REQUIRE(xi.status == RangeStatus::ok);
        CHECK(xi.value > 0.01);
        CHECK(xi.value < 10.0);
        // xi is estimated from above: p^< at the reported sigma is <= p (up
        // to Monte Carlo noise).
        EstimationResult at = estimate_success_prob(m, xi.value, sphere, 50000,
                                                    CompareMode::strict, 5, 4);
        CHECK(at.estimate <= 0.4 + 0.02);

        SigmaRangeEstimate eta = estimate_eta(m, 0.3, sphere, SigmaGrid{}, 20000, 22, 4);
        REQUIRE(eta.status == RangeStatus::ok);
        EstimationResult at_eta = estimate_success_prob(m, eta.value, sphere, 50000,
                                                        CompareMode::weak, 6, 4);
        CHECK(at_eta.estimate >= 0.3 - 0.02);
        // Thresholds are ordered: success stays above 0.3 until past xi(0.4).
        CHECK(xi.value <= eta.value);
    }
    SECTION("scale-invariant saddle at a = 1: p is 1/2 for every sigma") {
        Objective half = make_objective("quadratic_saddle:a=1");
        vec origin{0.0L, 0.0L};
        SigmaRangeEstimate xi = estimate_xi(origin, 0.4, half, SigmaGrid{}, 20000, 31, 4);
        CHECK(xi.status == RangeStatus::empty_set);
        CHECK(std::isinf(xi.value));

        SigmaRangeEstimate eta = estimate_eta(origin, 0.1, half, SigmaGrid{}, 20000, 32, 4);
        CHECK(eta.status == RangeStatus::at_grid_ceiling);
        CHECK(eta.value == 100.0);  // grid hi for a unit-scale probe
    }
    SECTION("vanishing success at the cubic critical point pins xi to the floor") {
        Objective cubic = make_objective("cubic_saddle");
        vec origin{0.0L, 0.0L};
        SigmaRangeEstimate xi = estimate_xi(origin, 0.2, cubic, SigmaGrid{}, 20000, 41, 4);
        CHECK(xi.status == RangeStatus::at_grid_floor);
        CHECK(xi.value == 0.0);
        CHECK(xi.resolution == 1e-8);
    }
    SECTION("unreachable eta level reports the empty set as 0") {
        Objective sphere = make_objective("sphere:d=2");
        vec m{1.0L, 0.0L};
        SigmaRangeEstimate eta = estimate_eta(m, 0.99, sphere, SigmaGrid{}, 20000, 51, 4);
        CHECK(eta.status == RangeStatus::empty_set);
        CHECK(eta.value == 0.0);
    }
}

TEST_CASE("success exponent fit recovers the cubic decay and the regular flat line",
          "[estimators]") {
    // At the cubic critical point p(sigma) ~ sigma^{1/2}.
    Objective cubic = make_objective("cubic_saddle");
    vec origin{0.0L, 0.0L};
    ExponentFit fit = estimate_success_exponent(origin, cubic, 1e-6, 1e-2, 9, 200000,
                                                CompareMode::strict, 61, 4);
    CHECK(fit.points_used >= 7);
    CHECK_THAT(fit.slope, Catch::Matchers::WithinAbs(0.5, 0.1));
    CHECK(fit.rows.size() == 9);

    // At a regular sphere point p is flat near 1/2: slope ~ 0.
    Objective sphere = make_objective("sphere:d=2");
    vec m{1.0L, 0.0L};
    ExponentFit flat = estimate_success_exponent(m, sphere, 1e-6, 1e-2, 9, 100000,
                                                 CompareMode::strict, 62, 4);
    CHECK_THAT(flat.slope, Catch::Matchers::WithinAbs(0.0, 0.05));
}

TEST_CASE("estimator input validation", "[estimators]") {
    Objective sphere = make_objective("sphere:d=2");
    vec m{1.0L, 0.0L};
    CHECK_THROWS_AS(estimate_success_prob(m, 0.3, sphere, 50, CompareMode::strict, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_success_prob(m, 0.0, sphere, 1000, CompareMode::strict, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_success_prob(vec{1.0L}, 0.3, sphere, 1000, CompareMode::strict, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_suboptimality(m, sphere, 500, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_xi(m, 0.0, sphere, SigmaGrid{}, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_xi(m, 0.4, sphere, SigmaGrid{1.0, 2.0, 8}, 1000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_xi(m, 0.4, sphere, SigmaGrid{2.0, 1.0, 41}, 1000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        estimate_success_exponent(m, sphere, 1e-3, 1e-2, 9, 1000, CompareMode::strict, 1),
        std::invalid_argument);
    CHECK_THROWS_AS(
        estimate_success_exponent(m, sphere, 1e-6, 1e-2, 3, 1000, CompareMode::strict, 1),
        std::invalid_argument);
}

TEST_CASE("compare mode labels round-trip", "[estimators]") {
    CHECK(to_string(CompareMode::strict) == "strict");
    CHECK(to_string(CompareMode::weak) == "weak");
    CHECK(compare_mode_from_string("strict") == CompareMode::strict);
    CHECK(compare_mode_from_string("weak") == CompareMode::weak);
    CHECK_THROWS_AS(compare_mode_from_string("loose"), std::invalid_argument);
    CHECK(to_string(RangeStatus::ok) == "ok");
    CHECK(to_string(RangeStatus::at_grid_floor) == "at_grid_floor");
}
