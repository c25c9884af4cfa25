// Acceptance checks. Prints one PASS/FAIL line per criterion; `--only N` runs one.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lateral_chemostat/design.hpp"
#include "lateral_chemostat/dmap.hpp"
#include "lateral_chemostat/dynamics.hpp"
#include "lateral_chemostat/equilibria.hpp"
#include "lateral_chemostat/growth.hpp"
#include "lateral_chemostat/parallel.hpp"
#include "oracles.hpp"
#include "random_configs.hpp"

using namespace latchem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const GrowthModel kMonod = GrowthModel::monod(1.0, 0.5);
constexpr double kSin = 10.0;
constexpr double kQ = 1.0;

DesignSpec example_spec(double s_ref, std::optional<double> d = std::nullopt) {
    return DesignSpec{kQ, kSin, s_ref, kMonod, d};
}

// 1. s_hat of Monod(1, 0.5) at s_in = 10.
Outcome criterion_1() {
    const auto t0 = Clock::now();
    const double sh = s_hat(kMonod, kSin);
    const double dt = seconds_since(t0);
    const bool ok = std::abs(sh - 1.79) <= 0.01 && dt < 1e-3;
    return {ok, fmt("s_hat = %.6f (target 1.79 +- 0.01), %.2e s", sh, dt)};
}

// 2. Fixed d = Q: s_ref where the optimal design switches from two tanks to the single lateral tank.
Outcome criterion_2() {
    const auto t0 = Clock::now();
    const double sh = s_hat(kMonod, kSin);
    auto lateral = [&](double s_ref) {
        return design_fixed_d(example_spec(s_ref), kQ).kind == DesignKind::SingleLateralTank;
    };
    double lo = sh + 1e-6, hi = kSin - 1e-6;
    if (lateral(lo) || !lateral(hi)) return {false, "no TwoTanks -> SingleLateralTank switch on (s_hat, s_in)"};
    while (hi - lo > 1e-12 * kSin) {
        const double mid = 0.5 * (lo + hi);
        (lateral(mid) ? hi : lo) = mid;
    }
    const double found = 0.5 * (lo + hi);
    const double target = 0.5 * (kSin + sh);
    const double dt = seconds_since(t0);
    const bool ok = std::abs(found - target) <= 0.01 && dt < 1.0;
    const auto at = design_fixed_d(example_spec(found + 1e-9), kQ);
    return {ok, fmt("switch at s_ref = %.6f (alpha = %.6f, s_G = %.6f); target (s_in+s_hat)/2 = %.6f "
                    "is where alpha reaches s_hat; %.3f s",
                    found, *at.alpha, *at.s_G, target, dt)};
}

// 3. Free-d volume ratio at s_ref = 5.9, cross-checked on a 400 x 400 (V1, V2) grid.
Outcome criterion_3() {
    const auto t0 = Clock::now();
    const double s_ref = 5.9;
    const auto spec = example_spec(s_ref);
    const auto r = design_free_d(spec);
    const double sh = s_hat(kMonod, kSin);
    const double closed_total = kQ * (kSin - s_ref) * g(kMonod, sh, kSin);
    const double baseline = kQ / mu(kMonod, s_ref);
    const double ratio = closed_total / baseline;

    constexpr int n = 400;
    const double hmax = 2.0 * baseline;
    ChemostatConfig base{0.0, 0.0, kQ, kSin, r.d, kMonod};
    std::vector<double> column_best(n, std::numeric_limits<double>::infinity());
    parallel_for(n, workers(), [&](std::size_t i) {
        const double V1 = hmax * static_cast<double>(i + 1) / n;
        double prev_s1 = std::nan(""), prev_V2 = 0.0;
        for (int j = 0; j < n; ++j) {
            ChemostatConfig c = base;
            c.V1 = V1;
            c.V2 = hmax * static_cast<double>(j + 1) / n;
            const auto eq = positive_equilibrium(c);
            const double s1 = eq ? eq->state.s1 : kSin;
            if (std::abs(s1 - s_ref) <= 1e-3) column_best[i] = std::min(column_best[i], V1 + c.V2);
            if (!std::isnan(prev_s1) && (prev_s1 - s_ref) * (s1 - s_ref) < 0.0) {
                const double V2 = prev_V2 + (c.V2 - prev_V2) * (prev_s1 - s_ref) / (prev_s1 - s1);
                column_best[i] = std::min(column_best[i], V1 + V2);
            }
            prev_s1 = s1;
            prev_V2 = c.V2;
        }
    });
    const double grid_total = *std::min_element(column_best.begin(), column_best.end());
    const double dt = seconds_since(t0);
    const double rel = std::abs(grid_total - r.total_volume) / r.total_volume;
    const bool ok = ratio >= 0.50 && ratio <= 0.65 && std::abs(r.total_volume - closed_total) <= 1e-12 * closed_total &&
                    rel <= 0.01 && dt < 30.0;
    return {ok, fmt("V_opt/V_single = %.6f, grid oracle total %.6f vs %.6f (rel %.2e), %.2f s", ratio, grid_total,
                    r.total_volume, rel, dt)};
}

// 4. Equilibrium solver vs damped Newton on 50 configs across the three existence cases.
Outcome criterion_4() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4);
    double worst = 0.0, worst_identity = 0.0;
    int unmatched_configs = 0, stray = 0;
    for (int i = 0; i < 50; ++i) {
        const auto c = testing_support::random_config(rng, testing_support::case_of_index(i));
        const auto eq = positive_equilibrium(c);
        if (!eq) {
            ++unmatched_configs;
            continue;
        }
        const double s1 = eq->state.s1, s2 = eq->state.s2;
        bool matched = false;
        for (int k = 0; k < 50; ++k) {
            const auto nr = oracle::damped_newton(c, oracle::uniform(rng, 0.0, c.s_in), oracle::uniform(rng, 0.0, c.s_in));
            if (!nr.converged) continue;
            if (std::max(std::abs(nr.s1 - c.s_in), std::abs(nr.s2 - c.s_in)) < 1e-6 * c.s_in) continue;
            const double err = std::max(std::abs(nr.s1 - s1), std::abs(nr.s2 - s2));
            if (err <= 1e-8) {
                matched = true;
                worst = std::max(worst, err);
            } else {
                ++stray;
            }
        }
        if (!matched) ++unmatched_configs;
        const double lhs = (c.V1 * mu(c.growth, s1) - c.Q) * (c.s_in - s1);
        const double rhs = -c.V2 * mu(c.growth, s2) * (c.s_in - s2);
        worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
    }
    const double dt = seconds_since(t0);
    const bool ok = unmatched_configs == 0 && stray == 0 && worst_identity <= 1e-10 && dt < 5.0;
    return {ok, fmt("max |dS| = %.2e, identity rel err %.2e, unmatched configs %d, stray roots %d, %.2f s", worst,
                    worst_identity, unmatched_configs, stray, dt)};
}

double slowest_rate(const std::vector<std::complex<double>>& ev) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& e : ev) m = std::max(m, e.real());
    return -m;
}

// 5. Random initial states converge to the attractor the analysis predicts.
Outcome criterion_5() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(5);
    struct Job {
        ChemostatConfig cfg;
        State target;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    int i = 0;
    while (jobs.size() < 20) {
        const auto c = testing_support::random_config(rng, testing_support::case_of_index(i++));
        const auto eq = positive_equilibrium(c);
        if (!eq || slowest_rate(eq->eigenvalues) < 0.05 * c.Q / c.total_volume()) continue;
        jobs.push_back({c, eq->state, rng()});
    }
    while (jobs.size() < 40) {
        const auto c = testing_support::random_any_config(rng);
        if (!washout_is_unique(c)) continue;
        const auto w = washout_equilibrium(c);
        if (slowest_rate(w.eigenvalues) < 0.05 * c.Q / c.total_volume()) continue;
        jobs.push_back({c, w.state, rng()});
    }
    std::vector<double> worst(jobs.size(), 0.0);
    std::vector<int> failures(jobs.size(), 0);
    parallel_for(jobs.size(), workers(), [&](std::size_t j) {
        const auto& job = jobs[j];
        std::mt19937_64 local(job.seed);
        SimulationOptions o;
        o.stop_at_steady_state = true;
        o.record_every = 1'000'000;
        const double horizon = 1e3 * job.cfg.total_volume() / job.cfg.Q;
        for (int k = 0; k < 100; ++k) {
            const double si = job.cfg.s_in;
            const State y0{oracle::uniform(local, 0, si), oracle::uniform(local, 0, si), oracle::uniform(local, 0, si),
                           oracle::uniform(local, 0, si)};
            try {
                const auto res = simulate(job.cfg, y0, horizon, o);
                const State& y = res.trajectory.states.back();
                const double err = std::max({std::abs(y.s1 - job.target.s1), std::abs(y.x1 - job.target.x1),
                                             std::abs(y.s2 - job.target.s2), std::abs(y.x2 - job.target.x2)});
                worst[j] = std::max(worst[j], err);
                if (err > 1e-4) ++failures[j];
            } catch (const std::exception&) {
                ++failures[j];
            }
        }
    });
    const double w_pos = *std::max_element(worst.begin(), worst.begin() + 20);
    const double w_wash = *std::max_element(worst.begin() + 20, worst.end());
    int nfail = 0;
    for (int f : failures) nfail += f;
    const double dt = seconds_since(t0);
    const bool ok = nfail == 0 && dt < 120.0;
    return {ok, fmt("max distance to E* %.2e, to E0 %.2e, %d of 4000 runs off target, %.2f s", w_pos, w_wash, nfail,
                    dt)};
}

/// s1* at diffusion d polished to rounding level by Newton on the raw balances.
double polished_s1(const ChemostatConfig& c, double d) {
    const auto cd = c.with_d(d);
    const auto eq = positive_equilibrium(cd);
    const auto nr = oracle::damped_newton(cd, eq->state.s1, eq->state.s2);
    return nr.converged ? nr.s1 : eq->state.s1;
}

// 6. d-derivative of s1* against central differences.
Outcome criterion_6() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    double worst = 0.0;
    int sign_bad = 0;
    for (int i = 0; i < 100; ++i) {
        const auto c = testing_support::random_config(rng, testing_support::case_of_index(i));
        const auto eq = positive_equilibrium(c);
        const auto sens = ds_dd(c, *eq);
        const double h = 1e-5 * c.d;
        const double fd = (polished_s1(c, c.d + h) - polished_s1(c, c.d - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - sens.ds1_dd) / std::abs(sens.ds1_dd));
        const double bp = beta_prime(c.growth, eq->state.s2, c.s_in);
        if ((sens.ds1_dd > 0.0) != (bp < 0.0) || sens.ds1_dd == 0.0) ++sign_bad;
    }
    const double dt = seconds_since(t0);
    const bool ok = worst <= 1e-4 && sign_bad == 0 && dt < 5.0;
    return {ok, fmt("max rel err %.2e, sign mismatches %d, %.2f s", worst, sign_bad, dt)};
}

ChemostatConfig shape_config(double V1, double V2) { return ChemostatConfig{V1, V2, kQ, kSin, 0.0, kMonod}; }

// 7. Sweep shapes in the three regimes of the minimiser.
Outcome criterion_7() {
    const auto t0 = Clock::now();
    std::vector<std::string> notes;
    bool ok = true;

    auto argmin = [](const DiffusionProfile& p) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < p.samples.size(); ++i)
            if (p.samples[i].s1_star < p.samples[k].s1_star) k = i;
        return k;
    };
    {
        const auto c = shape_config(0.4, 0.4);
        const auto p = sweep(c, default_d_grid(c, 400));
        const auto k = argmin(p);
        const bool good = p.diffusion_case == DiffusionCase::I && p.d_bar && k > 0 && k + 1 < p.samples.size() &&
                          p.samples[k].s1_star < kSin && p.samples[k].d < *p.d_bar &&
                          p.d_star.kind == DStarKind::Interior;
        ok = ok && good;
        notes.push_back(fmt("(i) min s1* %.4f at d %.4f < d_bar %.4f", p.samples[k].s1_star, p.samples[k].d, *p.d_bar));
    }
    {
        const auto c = shape_config(0.6, 0.6);
        const auto p = sweep(c, default_d_grid(c, 400));
        const auto k = argmin(p);
        const bool good = p.s1_star_inf && *p.s1_star_inf > p.s_hat && k > 0 && k + 1 < p.samples.size() &&
                          p.samples[k].s1_star < *p.s1_star_inf && p.d_star.kind == DStarKind::Interior;
        ok = ok && good;
        notes.push_back(fmt("(ii) min s1* %.4f < s1_inf %.4f", p.samples[k].s1_star, *p.s1_star_inf));
    }
    {
        const auto c = shape_config(1.0, 1.0);
        const auto p = sweep(c, default_d_grid(c, 400));
        bool mono = p.s1_star_inf && *p.s1_star_inf <= p.s_hat && p.d_star.kind == DStarKind::Decreasing;
        for (std::size_t i = 0; i < p.samples.size(); ++i) {
            mono = mono && p.samples[i].valid && p.samples[i].s1_star > *p.s1_star_inf;
            if (i > 0) mono = mono && p.samples[i].s1_star < p.samples[i - 1].s1_star;
        }
        ok = ok && mono;
        notes.push_back(fmt("(iii) decreasing, last s1* %.6f > s1_inf %.6f", p.samples.back().s1_star, *p.s1_star_inf));
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 10.0;
    return {ok, notes[0] + "; " + notes[1] + "; " + notes[2] + fmt("; %.2f s", dt)};
}

// 8. V_opt(d): decreasing then increasing, minimiser at the closed-form d*.
Outcome criterion_8() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (double s_ref : {3.0, 5.9, 8.0}) {
        const auto spec = example_spec(s_ref);
        const double d_star = *optimal_diffusion(spec);
        std::vector<double> grid(801);
        for (std::size_t i = 0; i < grid.size(); ++i)
            grid[i] = d_star * std::pow(10.0, -2.0 + 4.0 * static_cast<double>(i) / (grid.size() - 1));
        const auto curve = volume_curve(spec, grid);
        std::size_t k = 0;
        for (std::size_t i = 0; i < curve.size(); ++i)
            if (curve[i].total_volume < curve[k].total_volume) k = i;
        bool shape = k > 0 && k + 1 < curve.size();
        for (std::size_t i = 1; i < curve.size(); ++i) {
            const double a = curve[i - 1].total_volume, b = curve[i].total_volume;
            const double slack = 1e-12 * a;
            shape = shape && curve[i].valid && (i <= k ? b <= a + slack : b >= a - slack);
        }
        auto V = [&](double logd) { return design_fixed_d(spec, std::exp(logd)).total_volume; };
        const double d_num = std::exp(oracle::golden_min(V, std::log(grid[k - 1]), std::log(grid[k + 1]), 1e-12));
        const double rel = std::abs(d_num - d_star) / d_star;
        ok = ok && shape && rel <= 1e-6;
        detail += fmt("s_ref %.1f: d* %.6f, numeric %.6f (rel %.1e)%s; ", s_ref, d_star, d_num, rel,
                      shape ? "" : " NOT UNIMODAL");
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 10.0;
    return {ok, detail + fmt("%.2f s", dt)};
}

// 9. Randomised invariants, 1000 cases each.
Outcome criterion_9() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(9);
    constexpr int N = 1000;
    int bad_beta = 0, bad_g = 0, bad_mono = 0, bad_nonneg = 0, bad_exist = 0, skipped_exist = 0;

    for (int i = 0; i < N; ++i) {
        const auto gm = GrowthModel::monod(oracle::uniform(rng, 0.1, 5.0), oracle::uniform(rng, 0.01, 10.0));
        const double s_in = oracle::uniform(rng, 0.1, 50.0);
        double p[3] = {oracle::uniform(rng, 0, s_in), oracle::uniform(rng, 0, s_in), oracle::uniform(rng, 0, s_in)};
        std::sort(p, p + 3);
        if (p[1] - p[0] > 1e-9 * s_in && p[2] - p[1] > 1e-9 * s_in) {
            const double l = (beta(gm, p[1], s_in) - beta(gm, p[0], s_in)) / (p[1] - p[0]);
            const double r = (beta(gm, p[2], s_in) - beta(gm, p[1], s_in)) / (p[2] - p[1]);
            if (l < r - 1e-9 * std::max(1.0, std::abs(l))) ++bad_beta;
        }
        const double eps = 1e-3 * s_in;
        double a = oracle::uniform(rng, eps, s_in - eps), b = oracle::uniform(rng, eps, s_in - eps);
        if (std::abs(a - b) > 1e-3 * s_in) {
            const double mid = g(gm, 0.5 * (a + b), s_in);
            if (!(mid < 0.5 * (g(gm, a, s_in) + g(gm, b, s_in)))) ++bad_g;
        }
    }

    for (int i = 0; i < N; ++i) {
        auto c = testing_support::random_config(rng, testing_support::case_of_index(i));
        const auto range = existence_range(c);
        const double hi = std::isfinite(range.d_hi) ? range.d_hi : 100.0 * c.Q;
        double da = oracle::uniform(rng, 1e-3, 0.999) * hi, db = oracle::uniform(rng, 1e-3, 0.999) * hi;
        if (da > db) std::swap(da, db);
        if (db - da < 1e-9 * hi) continue;
        const double sa = positive_equilibrium_at(c, da).state.s2, sb = positive_equilibrium_at(c, db).state.s2;
        if (!(sa < sb + 1e-12 * c.s_in)) ++bad_mono;
    }

    std::vector<int> nonneg(N, 0);
    std::vector<ChemostatConfig> cfgs(N);
    std::vector<State> inits(N);
    for (int i = 0; i < N; ++i) {
        cfgs[i] = testing_support::random_any_config(rng);
        const double si = cfgs[i].s_in;
        inits[i] = {oracle::uniform(rng, 0, 2 * si), oracle::uniform(rng, 0, 2 * si), oracle::uniform(rng, 0, 2 * si),
                    oracle::uniform(rng, 0, 2 * si)};
        if (i % 4 == 0) inits[i].x1 = 0.0;
        if (i % 4 == 1) inits[i].s2 = 0.0;
    }
    parallel_for(N, workers(), [&](std::size_t i) {
        try {
            const auto res = simulate(cfgs[i], inits[i], 50.0 * cfgs[i].total_volume() / cfgs[i].Q);
            for (const auto& y : res.trajectory.states)
                if (y.min_component() < -1e-9) nonneg[i] = 1;
        } catch (const std::exception&) {
            nonneg[i] = 1;
        }
    });
    for (int v : nonneg) bad_nonneg += v;

    for (int i = 0; i < N; ++i) {
        const auto c = testing_support::random_any_config(rng);
        const double m = mu(c.growth, c.s_in);
        const double P = washout_polynomial(c, m);
        const double Pscale = c.V1 * c.V2 * m * m + (c.d * c.V1 + (c.Q + c.d) * c.V2) * m + c.d * c.Q;
        if (std::abs(P) < 1e-6 * Pscale || std::abs(m - c.Q / c.V1) < 1e-6 * m) {
            ++skipped_exist;
            continue;
        }
        const bool unique = washout_is_unique(c);
        const bool solver_found = positive_equilibrium(c).has_value();
        const bool scan_found = !oracle::scan_positive_steady_states(c, 100000).empty();
        if (unique == solver_found || unique == scan_found) ++bad_exist;
    }
    const double dt = seconds_since(t0);
    const bool ok = bad_beta + bad_g + bad_mono + bad_nonneg + bad_exist == 0 && dt < 60.0;
    return {ok, fmt("violations: beta concavity %d, g convexity %d, s2* monotone %d, nonnegativity %d, "
                    "existence %d (boundary skips %d); %.2f s",
                    bad_beta, bad_g, bad_mono, bad_nonneg, bad_exist, skipped_exist, dt)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3,
                                                         criterion_4, criterion_5, criterion_6,
                                                         criterion_7, criterion_8, criterion_9};
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    bool all = true;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (only != 0 && static_cast<int>(k + 1) != only) continue;
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << (k + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
