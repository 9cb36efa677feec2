#include "es1p1/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace es::objectives {

namespace {

constexpr real kPi = std::numbers::pi_v<real>;

real norm2(const vec& x) {
    real s = 0.0L;
    for (real xi : x) s += xi * xi;
    return s;
}

Box cube(std::size_t d, real lo, real hi) {
    return Box{vec(d, lo), vec(d, hi)};
}

// --- spec-string parameter access -------------------------------------------

struct ParamReader {
    const ObjectiveSpec& spec;
    std::vector<std::string> known;

    std::string find(const std::string& key, const std::string& fallback) {
        known.push_back(key);
        for (const auto& [k, v] : spec.params)
            if (k == key) return v;
        return fallback;
    }
    double number(const std::string& key, double fallback) {
        std::string v = find(key, "");
        if (v.empty()) return fallback;
        double out = 0.0;
        std::size_t pos = 0;
        try {
            out = std::stod(v, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;  // unparseable: same report as trailing garbage
        }
        if (pos != v.size())
            throw std::invalid_argument("objective '" + spec.name + "': parameter '" + key +
                                        "' is not a number: '" + v + "'");
        return out;
    }
    int integer(const std::string& key, int fallback) {
        double v = number(key, static_cast<double>(fallback));
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw std::invalid_argument("objective '" + spec.name + "': parameter '" + key +
                                        "' must be an integer");
        return i;
    }
    void finish() const {
        for (const auto& [k, v] : spec.params) {
            if (std::find(known.begin(), known.end(), k) == known.end()) {
                std::string keys;
                for (const auto& name : known) keys += (keys.empty() ? "" : ", ") + name;
                throw std::invalid_argument("objective '" + spec.name + "': unknown parameter '" +
                                            k + "' (valid: " + (keys.empty() ? "none" : keys) + ")");
            }
        }
    }
};

std::string num_str(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// --- factories ---------------------------------------------------------------

Objective make_sphere(ParamReader& p) {
    int d = p.integer("d", 2);
    p.finish();
    if (d < 1) throw std::invalid_argument("sphere: d must be >= 1");
    Objective o;
    o.id = "sphere:d=" + std::to_string(d);
    o.dim = static_cast<std::size_t>(d);
    o.evaluate = [](const vec& x) { return norm2(x); };
    o.suboptimality_strict = [](const vec& x) { return unit_ball_suboptimality(x); };
    o.suboptimality_weak = o.suboptimality_strict;
    o.level_set_mass = [](const vec&) { return 0.0L; };
    o.optimum = vec(o.dim, 0.0L);
    o.bounding_box = cube(o.dim, -2.0L, 2.0L);
    return o;
}

Objective make_rosenbrock(ParamReader& p) {
    p.finish();
    Objective o;
    o.id = "rosenbrock2d";
    o.dim = 2;
    o.evaluate = [](const vec& x) {
        real a = x[0] * x[0] - x[1];
        real b = x[0] - 1.0L;
        return 100.0L * a * a + b * b;
    };
    o.optimum = vec{1.0L, 1.0L};
    o.bounding_box = Box{vec{-2.0L, -1.0L}, vec{2.0L, 3.0L}};
    return o;
}

Objective make_quadratic_saddle(ParamReader& p) {
    double a = p.number("a", 9.0);
    p.finish();
    if (a <= 0) throw std::invalid_argument("quadratic_saddle: a must be > 0");
    Objective o;
    o.id = "quadratic_saddle:a=" + num_str(a);
    o.dim = 2;
    real ar = static_cast<real>(a);
    o.evaluate = [ar](const vec& x) { return ar * x[0] * x[0] - x[1] * x[1]; };
    o.bounding_box = cube(2, -4.0L, 4.0L);
    // The improving cone at the origin is scale-invariant, so the rate is
    // exact for every sigma.
    o.rate_table = {{"saddle_point", vec{0.0L, 0.0L},
                     2.0 * std::atan(1.0 / std::sqrt(a)) / std::numbers::pi, 1.0}};
    return o;
}

Objective make_cubic_saddle(ParamReader& p) {
    p.finish();
    Objective o;
    o.id = "cubic_saddle";
    o.dim = 2;
    o.evaluate = [](const vec& x) { return x[0] * x[0] * x[0] + x[1] * x[1]; };
    o.bounding_box = cube(2, -4.0L, 4.0L);
    return o;
}

Objective make_linear_ridge(ParamReader& p) {
    double a = p.number("a", 10.0);
    p.finish();
    if (a <= 0) throw std::invalid_argument("linear_ridge: a must be > 0");
    Objective o;
    o.id = "linear_ridge:a=" + num_str(a);
    o.dim = 2;
    real ar = static_cast<real>(a);
    o.evaluate = [ar](const vec& x) { return x[0] + ar * std::fabs(x[1]); };
    o.bounding_box = cube(2, -4.0L, 4.0L);
    o.rate_table = {{"ridge_point", vec{0.0L, 0.0L}, std::atan(1.0 / a) / std::numbers::pi, 1.0}};
    return o;
}

Objective make_sphere_jump(ParamReader& p) {
    std::string variant = p.find("variant", "strip");
    double a = p.number("a", 1.0);
    int d = p.integer("d", 2);
    p.finish();
    if (d < 2) throw std::invalid_argument("sphere_jump: d must be >= 2");

    Objective o;
    o.dim = static_cast<std::size_t>(d);
    std::function<bool(const vec&)> in_jump;

    if (variant == "strip") {
        if (d != 2) throw std::invalid_argument("sphere_jump: variant=strip requires d=2");
        real ar = static_cast<real>(a);
        in_jump = [ar](const vec& x) { return x[0] > ar && x[1] > 0.0L && x[1] < 1.0L; };
        o.id = "sphere_jump:variant=strip,a=" + num_str(a);
        // Exact tangent-cone rate at the strip corner, valid for sigma much
        // smaller than the corner offset baked into the probe point.
        o.rate_table = {{"strip_corner", vec{static_cast<real>(a) + 1e-3L, 1.0L},
                         std::atan(a) / (2.0 * std::numbers::pi), 1e-5}};
    } else if (variant == "open_ball" || variant == "closed_ball") {
        bool closed = (variant == "closed_ball");
        in_jump = [closed](const vec& x) {
            real s = (x[0] - 1.0L) * (x[0] - 1.0L);
            for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
            return closed ? s <= 0.25L : s < 0.25L;
        };
        o.id = "sphere_jump:variant=" + variant + ",d=" + std::to_string(d);
    } else if (variant == "star") {
        // Penalize the complement of a star-shaped neighborhood of the
        // optimum: x is free iff ||x|| <= rho(x/||x||), with a smooth
        // low-order radius perturbation of amplitude 0.3.
        in_jump = [](const vec& x) {
            real r2 = norm2(x);
            if (r2 == 0.0L) return false;
            real r = std::sqrt(r2);
            real rho = 1.0L + 0.6L * (x[0] / r) * (x[1] / r);
            return r > rho;
        };
        o.id = "sphere_jump:variant=star,d=" + std::to_string(d);
    } else {
        throw std::invalid_argument(
            "sphere_jump: unknown variant '" + variant +
            "' (valid: star, open_ball, closed_ball, strip)");
    }

    o.evaluate = [in_jump](const vec& x) { return norm2(x) + (in_jump(x) ? 1.0L : 0.0L); };
    o.optimum = vec(o.dim, 0.0L);
    o.bounding_box = cube(o.dim, -2.0L, 2.0L);
    return o;
}

Objective make_stepped_sphere(ParamReader& p) {
    int k = p.integer("k", 4);
    int d = p.integer("d", 2);
    p.finish();
    if (k < 1) throw std::invalid_argument("stepped_sphere: k must be >= 1");
    if (d < 1) throw std::invalid_argument("stepped_sphere: d must be >= 1");

    Objective o;
    o.id = "stepped_sphere:k=" + std::to_string(k) + ",d=" + std::to_string(d);
    o.dim = static_cast<std::size_t>(d);
    real kr = static_cast<real>(k);
    o.evaluate = [kr](const vec& x) { return std::ceil(kr * norm2(x)) / kr; };
    // Level j = ceil(k ||x||^2) occupies the annulus (j-1)/k < ||x||^2 <= j/k,
    // so sub-level volumes are exact ball volumes at the annulus radii.
    auto level = [kr](const vec& x) { return std::ceil(kr * norm2(x)); };
    std::size_t dim = o.dim;
    o.suboptimality_strict = [level, kr, dim](const vec& x) {
        real j = level(x);
        if (j <= 0.0L) return 0.0L;
        return ball_volume(dim, std::sqrt((j - 1.0L) / kr));
    };
    o.suboptimality_weak = [level, kr, dim](const vec& x) {
        real j = level(x);
        if (j < 0.0L) return 0.0L;
        return ball_volume(dim, std::sqrt(j / kr));
    };
    auto strict = o.suboptimality_strict;
    auto weak = o.suboptimality_weak;
    o.level_set_mass = [strict, weak](const vec& x) { return weak(x) - strict(x); };
    o.optimum = vec(o.dim, 0.0L);
    o.optimum_tolerance = 1e-4;
    o.bounding_box = cube(o.dim, -2.0L, 2.0L);
    return o;
}

Objective make_cantor_barrier(ParamReader& p) {
    std::string variant = p.find("variant", "fat");
    int depth = p.integer("depth", 40);
    p.finish();
    CantorSpec spec;
    if (variant == "fat") {
        spec.variant = CantorSpec::Variant::fat;
    } else if (variant == "null") {
        spec.variant = CantorSpec::Variant::null;
    } else {
        throw std::invalid_argument("cantor_barrier: unknown variant '" + variant +
                                    "' (valid: fat, null)");
    }
    if (depth < 0) throw std::invalid_argument("cantor_barrier: depth must be >= 0");
    spec.depth = depth;

    Objective o;
    o.id = "cantor_barrier:variant=" + variant + ",depth=" + std::to_string(depth);
    o.dim = 1;
    o.evaluate = [spec](const vec& x) {
        return x[0] + (cantor_contains(x[0], spec) ? 1.0L : 0.0L);
    };
    o.bounding_box = Box{vec{-2.0L}, vec{1.0L}};
    return o;
}

struct Factory {
    ObjectiveInfo info;
    Objective (*make)(ParamReader&);
};

const std::vector<Factory>& factories() {
    static const std::vector<Factory> table = {
        {{"sphere", "d=2", "sum of squares; analytic sub-level volumes"}, make_sphere},
        {{"rosenbrock2d", "", "100(x1^2-x2)^2 + (x1-1)^2; optimum (1,1)"}, make_rosenbrock},
        {{"quadratic_saddle", "a=9", "a*x1^2 - x2^2; scale-invariant cone at origin"},
         make_quadratic_saddle},
        {{"cubic_saddle", "", "x1^3 + x2^2; degenerate critical point at origin"},
         make_cubic_saddle},
        {{"linear_ridge", "a=10", "x1 + a|x2|; sharp ridge along x1 axis"}, make_linear_ridge},
        {{"sphere_jump", "variant=strip,a=1,d=2",
          "||x||^2 plus unit jump on a set S (variants: star, open_ball, closed_ball, strip)"},
         make_sphere_jump},
        {{"stepped_sphere", "k=4,d=2", "ceil(k||x||^2)/k; plateaued sphere"},
         make_stepped_sphere},
        {{"cantor_barrier", "variant=fat,depth=40",
          "x plus unit jump on a truncated Cantor set in [-1,0] (variants: fat, null)"},
         make_cantor_barrier},
    };
    return table;
}

}  // namespace

real ball_volume(std::size_t d, real radius) {
    if (radius <= 0.0L) return 0.0L;
    real dd = static_cast<real>(d);
    return std::pow(kPi, dd / 2.0L) / std::tgamma(dd / 2.0L + 1.0L) * std::pow(radius, dd);
}

real unit_ball_suboptimality(const vec& x) {
    return ball_volume(x.size(), std::sqrt(norm2(x)));
}

bool cantor_contains(real x, const CantorSpec& spec) {
    if (x < -1.0L || x > 0.0L) return false;
    real lo = -1.0L, hi = 0.0L;
    real fat_gap = 0.25L;  // 4^{-n} at stage n
    for (int n = 1; n <= spec.depth; ++n) {
        real gap = (spec.variant == CantorSpec::Variant::fat) ? fat_gap : (hi - lo) / 3.0L;
        real mid = lo + (hi - lo) / 2.0L;
        real glo = mid - gap / 2.0L;
        real ghi = mid + gap / 2.0L;
        if (x > glo && x < ghi) return false;  // inside the open removed gap
        if (x <= glo)
            hi = glo;
        else
            lo = ghi;
        fat_gap *= 0.25L;
    }
    return true;
}

real cantor_measure(const CantorSpec& spec) {
    if (spec.variant == CantorSpec::Variant::null) {
        // (2/3)^depth of the unit interval survives.
        return std::pow(2.0L / 3.0L, static_cast<real>(spec.depth));
    }
    // Stage n removes 2^{n-1} gaps of length 4^{-n}: total 1/2 (1 - 2^{-depth}).
    real removed = 0.0L;
    real term = 0.25L;  // 2^{n-1} 4^{-n} at n=1
    for (int n = 1; n <= spec.depth; ++n) {
        removed += term;
        term *= 0.5L;
    }
    return 1.0L - removed;
}

std::string ObjectiveSpec::canonical() const {
    std::string out = name;
    for (std::size_t i = 0; i < params.size(); ++i)
        out += (i == 0 ? ":" : ",") + params[i].first + "=" + params[i].second;
    return out;
}

ObjectiveSpec parse_objective_spec(const std::string& text) {
    ObjectiveSpec spec;
    auto colon = text.find(':');
    spec.name = text.substr(0, colon);
    if (spec.name.empty()) throw std::invalid_argument("empty objective spec");
    if (colon == std::string::npos) return spec;
    std::string rest = text.substr(colon + 1);
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw std::invalid_argument("objective spec '" + text +
                                        "': expected key=value, got '" + item + "'");
        spec.params.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    if (rest.empty())
        throw std::invalid_argument("objective spec '" + text + "': trailing ':'");
    return spec;
}

Objective make_objective(const ObjectiveSpec& spec) {
    for (const auto& f : factories()) {
        if (f.info.name == spec.name) {
            ParamReader reader{spec, {}};
            return f.make(reader);
        }
    }
    std::string names;
    for (const auto& f : factories()) names += (names.empty() ? "" : ", ") + f.info.name;
    throw std::invalid_argument("unknown objective '" + spec.name + "' (valid: " + names + ")");
}

Objective make_objective(const std::string& spec_text) {
    return make_objective(parse_objective_spec(spec_text));
}

const std::vector<ObjectiveInfo>& objective_registry() {
    static const std::vector<ObjectiveInfo> infos = [] {
        std::vector<ObjectiveInfo> out;
        for (const auto& f : factories()) out.push_back(f.info);
        return out;
    }();
    return infos;
}

}  // namespace es::objectives
