#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "es1p1/rng.hpp"

namespace es::objectives {

// Axis-aligned box, used both as sampling domain for volume estimates and as
// the reference region for box-relative sub-level volumes of unbounded-below
// objectives.
struct Box {
    vec lo, hi;

    real volume() const {
        real v = 1.0L;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }
    bool contains(const vec& x) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
};

// Closed-form success rate attached to a distinguished probe point, valid for
// every sigma (cone geometry) or for sigma small relative to a documented
// offset (jump corner).
struct RatePoint {
    std::string name;      // e.g. "saddle_point", "ridge_point", "strip_corner"
    vec point;
    double rate;           // exact success probability at the probe
    double sigma_hint;     // recommended probe sigma
};

struct CantorSpec {
    enum class Variant { fat, null };
    Variant variant = Variant::fat;
    int depth = 40;
};

// A benchmark objective. `evaluate` is total on R^d; analytic hooks are null
// when no closed form exists. Sub-level volumes distinguish the strict set
// {f < f(x)} from the weak set {f <= f(x)}; they differ only on plateaued
// objectives (stepped_sphere), where level_set_mass gives the Lebesgue mass
// of the level set through x.
struct Objective {
    std::string id;                                   // canonical spec string
    std::size_t dim = 0;
    std::function<real(const vec&)> evaluate;
    std::function<real(const vec&)> suboptimality_strict;  // Λ({f < f(x)})
    std::function<real(const vec&)> suboptimality_weak;    // Λ({f <= f(x)})
    std::function<real(const vec&)> level_set_mass;        // Λ({f = f(x)})
    std::optional<vec> optimum;
    double optimum_tolerance = 1e-4;
    Box bounding_box;
    std::vector<RatePoint> rate_table;

    real operator()(const vec& x) const { return evaluate(x); }
};

// Volume of the d-ball of radius ||x||: pi^{d/2} / Gamma(d/2 + 1) * ||x||^d.
// This is the spatial suboptimality of the sphere function at x.
real unit_ball_suboptimality(const vec& x);
real ball_volume(std::size_t d, real radius);

// Membership test for the truncated Smith-Volterra-Cantor set (variant fat:
// stage n removes the open middle interval of absolute length 4^{-n} from
// each of the 2^{n-1} surviving intervals of [-1, 0]; variant null: open
// middle thirds). The set is closed; interval endpoints stay inside. Cost is
// O(depth).
bool cantor_contains(real x, const CantorSpec& spec);

// Lebesgue measure of the depth-truncated set (exact series).
real cantor_measure(const CantorSpec& spec);

// Parsed form of an objective spec string such as
//   "sphere:d=2"  "quadratic_saddle:a=9"  "cantor_barrier:variant=fat,depth=40"
struct ObjectiveSpec {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;

    std::string canonical() const;
};

ObjectiveSpec parse_objective_spec(const std::string& text);

// Factory. Throws std::invalid_argument with the list of valid names /
// parameters for unknown input.
Objective make_objective(const ObjectiveSpec& spec);
Objective make_objective(const std::string& spec_text);

// Registry entry for `list-objectives`.
struct ObjectiveInfo {
    std::string name;
    std::string params;       // human-readable parameter summary with defaults
    std::string description;
};
const std::vector<ObjectiveInfo>& objective_registry();

}  // namespace es::objectives
