#include "es1p1/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace es::estimators {

namespace {

constexpr double kWilsonZ = 1.959963984540054;  // 97.5% normal quantile
constexpr long long kBatch = 4096;

// Runs fn(batch_index, batch_size) over ceil(n / kBatch) fixed batches and
// sums the returned counts. The batch layout is independent of `jobs`, so the
// totals are reproducible under any thread count.
template <typename Fn>
long long sum_over_batches(long long n, int jobs, Fn&& fn) {
    long long n_batches = (n + kBatch - 1) / kBatch;
    auto batch_size = [n](long long b) {
        return std::min(kBatch, n - b * kBatch);
    };
    if (jobs <= 1 || n_batches <= 1) {
        long long total = 0;
        for (long long b = 0; b < n_batches; ++b) total += fn(b, batch_size(b));
        return total;
    }
    int workers = static_cast<int>(std::min<long long>(jobs, n_batches));
    std::vector<long long> partial(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            long long local = 0;
            for (long long b = w; b < n_batches; b += workers) local += fn(b, batch_size(b));
            partial[static_cast<std::size_t>(w)] = local;
        });
    }
    for (auto& t : threads) t.join();
    long long total = 0;
    for (long long c : partial) total += c;
    return total;
}

bool improves(real f_candidate, real f_reference, CompareMode mode) {
    return mode == CompareMode::strict ? f_candidate < f_reference : f_candidate <= f_reference;
}

EstimationResult proportion_result(long long successes, long long n, std::uint64_t seed) {
    EstimationResult r;
    r.estimate = static_cast<double>(successes) / static_cast<double>(n);
    Wilson w = wilson_interval(successes, n);
    r.ci_lo = w.lo;
    r.ci_hi = w.hi;
    r.ci_halfwidth = (w.hi - w.lo) / 2.0;
    r.n = n;
    r.seed = seed;
    return r;
}

}  // namespace

std::string to_string(CompareMode m) { return m == CompareMode::strict ? "strict" : "weak"; }

CompareMode compare_mode_from_string(const std::string& s) {
    if (s == "strict") return CompareMode::strict;
    if (s == "weak") return CompareMode::weak;
    throw std::invalid_argument("unknown compare mode '" + s + "' (valid: strict, weak)");
}

Wilson wilson_interval(long long successes, long long n) {
    if (n <= 0) return Wilson{0.0, 1.0};
    double z = kWilsonZ;
    double nn = static_cast<double>(n);
    double p = static_cast<double>(successes) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return Wilson{std::max(0.0, center - half), std::min(1.0, center + half)};
}

EstimationResult estimate_success_prob(const vec& m, double sigma, const Objective& objective,
                                       long long n, CompareMode mode, std::uint64_t seed,
                                       int jobs) {
    if (n < 100) throw std::invalid_argument("estimate_success_prob: n must be >= 100");
    if (!(sigma > 0)) throw std::invalid_argument("estimate_success_prob: sigma must be > 0");
    if (m.size() != objective.dim)
        throw std::invalid_argument("estimate_success_prob: point dimension mismatch");

    real f_ref = objective.evaluate(m);
    real sig = static_cast<real>(sigma);
    long long hits = sum_over_batches(n, jobs, [&](long long batch, long long count) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(batch));
        vec x(m.size());
        long long local = 0;
        for (long long i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < m.size(); ++j)
                x[j] = m[j] + sig * static_cast<real>(rng.normal());
            if (improves(objective.evaluate(x), f_ref, mode)) ++local;
        }
        return local;
    });
    return proportion_result(hits, n, seed);
}

EstimationResult estimate_suboptimality(const vec& x, const Objective& objective, long long n,
                                        std::uint64_t seed, CompareMode mode, int jobs) {
    if (n < 1000) throw std::invalid_argument("estimate_suboptimality: n must be >= 1000");
    if (x.size() != objective.dim)
        throw std::invalid_argument("estimate_suboptimality: point dimension mismatch");

    const auto& box = objective.bounding_box;
    real f_ref = objective.evaluate(x);
    std::size_t d = objective.dim;

    // Improving samples in the outer 0.5% shell of the box indicate the
    // sub-level set is clipped; encode shell hits in the second counter.
    std::vector<double> shell_lo(d), shell_hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        double span = static_cast<double>(box.hi[j] - box.lo[j]);
        shell_lo[j] = static_cast<double>(box.lo[j]) + 0.005 * span;
        shell_hi[j] = static_cast<double>(box.hi[j]) - 0.005 * span;
    }

    long long hits = 0, shell_hits = 0;
    long long packed = sum_over_batches(n, jobs, [&](long long batch, long long count) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(batch));
        vec s(d);
        long long local_hits = 0, local_shell = 0;
        for (long long i = 0; i < count; ++i) {
            bool in_shell = false;
            for (std::size_t j = 0; j < d; ++j) {
                double u = rng.uniform(static_cast<double>(box.lo[j]),
                                       static_cast<double>(box.hi[j]));
                s[j] = static_cast<real>(u);
                if (u < shell_lo[j] || u > shell_hi[j]) in_shell = true;
            }
            if (improves(objective.evaluate(s), f_ref, mode)) {
                ++local_hits;
                if (in_shell) ++local_shell;
            }
        }
        return local_hits * (n + 1) + local_shell;
    });
    hits = packed / (n + 1);
    shell_hits = packed % (n + 1);

    double volume = static_cast<double>(box.volume());
    EstimationResult r = proportion_result(hits, n, seed);
    r.estimate *= volume;
    r.ci_lo *= volume;
    r.ci_hi *= volume;
    r.ci_halfwidth *= volume;
    r.boundary_flag = shell_hits > 0;
    return r;
}

SigmaGrid default_sigma_grid(const vec& m) {
    real s = 0.0L;
    for (real mi : m) s += mi * mi;
    double scale = std::max(static_cast<double>(std::sqrt(s)), 1.0);
    return SigmaGrid{1e-8 * scale, 1e2 * scale, 41};
}

namespace {

struct RangeScanConfig {
    CompareMode mode;
    bool scan_upward;  // xi scans up; eta scans down
};

SigmaRangeEstimate scan_sigma_range(const vec& m, double p, const Objective& objective,
                                    SigmaGrid grid, long long n_per_point, std::uint64_t seed,
                                    int jobs, const RangeScanConfig& cfg) {
    if (grid.lo <= 0.0 || grid.hi <= 0.0) {
        SigmaGrid def = default_sigma_grid(m);
        if (grid.lo <= 0.0) grid.lo = def.lo;
        if (grid.hi <= 0.0) grid.hi = def.hi;
    }
    if (grid.points < 32)
        throw std::invalid_argument("sigma range scan: grid must have >= 32 points");
    if (!(grid.lo < grid.hi))
        throw std::invalid_argument("sigma range scan: grid.lo must be < grid.hi");
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("sigma range scan: p must lie in (0, 1)");

    SigmaRangeEstimate out;
    out.p = p;
    out.grid = grid;
    out.n_per_point = n_per_point;
    out.seed = seed;

    std::uint64_t stream = 0;
    auto prob = [&](double sigma) {
        EstimationResult r = estimate_success_prob(
            m, sigma, objective, n_per_point, cfg.mode, Rng::mix(seed + 0x51D5CA11ULL) + stream,
            jobs);
        ++stream;
        return r;
    };
    // xi qualification: confidently p^< <= p. eta qualification: confidently
    // p^<= >= p.
    auto qualifies = [&](const EstimationResult& r) {
        return cfg.scan_upward ? r.ci_hi <= p : r.ci_lo >= p;
    };
    auto straddles = [&](const EstimationResult& r) { return r.ci_lo <= p && p <= r.ci_hi; };

    std::vector<double> sigmas(static_cast<std::size_t>(grid.points));
    double ratio = std::pow(grid.hi / grid.lo, 1.0 / (grid.points - 1));
    for (int i = 0; i < grid.points; ++i)
        sigmas[static_cast<std::size_t>(i)] = grid.lo * std::pow(ratio, i);
    sigmas.front() = grid.lo;
    sigmas.back() = grid.hi;

    int found = -1;
    bool any_straddle = false;
    for (int step = 0; step < grid.points; ++step) {
        int i = cfg.scan_upward ? step : grid.points - 1 - step;
        EstimationResult r = prob(sigmas[static_cast<std::size_t>(i)]);
        if (qualifies(r)) {
            found = i;
            break;
        }
        if (straddles(r)) any_straddle = true;
    }

    if (found < 0) {
        out.status = any_straddle ? RangeStatus::inconclusive : RangeStatus::empty_set;
        if (out.status == RangeStatus::empty_set)
            out.value = cfg.scan_upward ? std::numeric_limits<double>::infinity() : 0.0;
        return out;
    }
    if (cfg.scan_upward && found == 0) {
        out.status = RangeStatus::at_grid_floor;
        out.value = 0.0;  // consistent with xi = 0
        out.resolution = grid.lo;
        return out;
    }
    if (!cfg.scan_upward && found == grid.points - 1) {
        out.status = RangeStatus::at_grid_ceiling;
        out.value = grid.hi;
        out.resolution = grid.hi;
        return out;
    }

    // Bisect in log space between the qualifying grid point and its
    // non-qualifying neighbor. xi keeps the qualifying side as the upper end
    // (estimate from above); eta keeps it as the lower end (from below).
    double qual = sigmas[static_cast<std::size_t>(found)];
    double other = sigmas[static_cast<std::size_t>(cfg.scan_upward ? found - 1 : found + 1)];
    for (int round = 0; round < 8; ++round) {
        double mid = std::sqrt(qual * other);
        if (qualifies(prob(mid)))
            qual = mid;
        else
            other = mid;
    }
    out.status = RangeStatus::ok;
    out.value = qual;
    out.resolution = std::fabs(qual - other);
    return out;
}

}  // namespace

SigmaRangeEstimate estimate_xi(const vec& m, double p, const Objective& objective, SigmaGrid grid,
                               long long n_per_point, std::uint64_t seed, int jobs) {
    return scan_sigma_range(m, p, objective, grid, n_per_point, seed, jobs,
                            RangeScanConfig{CompareMode::strict, true});
}

SigmaRangeEstimate estimate_eta(const vec& m, double p, const Objective& objective, SigmaGrid grid,
                                long long n_per_point, std::uint64_t seed, int jobs) {
    return scan_sigma_range(m, p, objective, grid, n_per_point, seed, jobs,
                            RangeScanConfig{CompareMode::weak, false});
}

std::string to_string(RangeStatus s) {
    switch (s) {
        case RangeStatus::ok: return "ok";
        case RangeStatus::at_grid_floor: return "at_grid_floor";
        case RangeStatus::at_grid_ceiling: return "at_grid_ceiling";
        case RangeStatus::empty_set: return "empty_set";
        case RangeStatus::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

ExponentFit estimate_success_exponent(const vec& m, const Objective& objective, double sigma_lo,
                                      double sigma_hi, int points, long long n_per_point,
                                      CompareMode mode, std::uint64_t seed, int jobs) {
    if (!(sigma_lo > 0 && sigma_hi > sigma_lo))
        throw std::invalid_argument("estimate_success_exponent: need 0 < sigma_lo < sigma_hi");
    if (std::log10(sigma_hi / sigma_lo) < 3.0 - 1e-9)
        throw std::invalid_argument("estimate_success_exponent: grid must span >= 3 decades");
    if (points < 4) throw std::invalid_argument("estimate_success_exponent: need >= 4 points");

    ExponentFit fit;
    fit.n_per_point = n_per_point;
    fit.seed = seed;

    double ratio = std::pow(sigma_hi / sigma_lo, 1.0 / (points - 1));
    for (int i = 0; i < points; ++i) {
        double sigma = sigma_lo * std::pow(ratio, i);
        EstimationResult r = estimate_success_prob(m, sigma, objective, n_per_point, mode,
                                                   Rng::mix(seed) + static_cast<std::uint64_t>(i),
                                                   jobs);
        ExponentRow row;
        row.sigma = sigma;
        row.p_hat = r.estimate;
        row.ci_lo = r.ci_lo;
        row.ci_hi = r.ci_hi;
        row.successes = std::llround(r.estimate * static_cast<double>(n_per_point));
        fit.rows.push_back(row);
    }

    // Weighted least squares on (log sigma, log p), weights = inverse squared
    // CI width in log space; zero-success rows cannot enter the fit.
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (const auto& row : fit.rows) {
        if (row.successes <= 0) {
            ++fit.points_dropped;
            continue;
        }
        double x = std::log(row.sigma);
        double y = std::log(row.p_hat);
        double lw = std::log(row.ci_hi) - std::log(std::max(row.ci_lo, 1e-300));
        double w = 1.0 / (lw * lw);
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
        ++fit.points_used;
    }
    if (fit.points_used < 2)
        throw std::runtime_error("estimate_success_exponent: fewer than 2 grid points with "
                                 "successes; increase the budget or raise sigma_lo");
    double denom = sw * swxx - swx * swx;
    fit.slope = (sw * swxy - swx * swy) / denom;
    fit.intercept = (swy - fit.slope * swx) / sw;

    double ss = 0;
    for (const auto& row : fit.rows) {
        if (row.successes <= 0) continue;
        double x = std::log(row.sigma);
        double y = std::log(row.p_hat);
        double lw = std::log(row.ci_hi) - std::log(std::max(row.ci_lo, 1e-300));
        double w = 1.0 / (lw * lw);
        double e = y - (fit.intercept + fit.slope * x);
        ss += w * e * e;
    }
    fit.residual = std::sqrt(ss / sw);
    return fit;
}

}  // namespace es::estimators
