#pragma once

/**
 * @file dmap.hpp
 * @brief The diffusion-response map d -> (s1*(d), s2*(d)) for fixed volumes.
 *
 * Three regimes, with V = V1 + V2:
 *   I   mu(s_in) <  Q/V           positive equilibrium for d in (0, d_bar)
 *   II  Q/V <= mu(s_in) <= Q/V1   for every d > 0
 *   III mu(s_in) >  Q/V1          for every d >= 0
 *
 * s2*(d) is increasing, from 0 toward s_in (case I) or toward
 * s1_inf = mu^{-1}(Q/V). The slope of s1* has the sign of -beta(s2*)', so s1*(d) has an
 * interior minimum at the d_star with s2*(d_star) = s_hat exactly when s2*
 * passes s_hat: always in case I, and when s1_inf > s_hat otherwise. With
 * s1_inf <= s_hat, s1*(d) decreases toward s1_inf.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "equilibria.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "parallel.hpp"
#include "roots.hpp"

namespace latchem {

enum class DiffusionCase { I, II, III };

inline const char* to_string(DiffusionCase c) {
    switch (c) {
        case DiffusionCase::I: return "I";
        case DiffusionCase::II: return "II";
        case DiffusionCase::III: return "III";
    }
    return "?";
}

struct ExistenceRange {
    DiffusionCase diffusion_case = DiffusionCase::I;
    double d_lo = 0.0;
    double d_hi = std::numeric_limits<double>::infinity();
    /// d = 0 belongs to the range (case III only).
    bool includes_zero = false;

    [[nodiscard]] bool contains(double d) const {
        if (d == 0.0) return includes_zero;
        return d > d_lo && d < d_hi;
    }
};

namespace detail {

inline void require_two_volumes(const ChemostatConfig& cfg, const char* what) {
    if (!(cfg.V1 > 0.0) || !(cfg.V2 > 0.0)) {
        throw DomainError(std::string(what) + ": requires V1 > 0 and V2 > 0");
    }
}

}  // namespace detail

/// Regime of the configuration; cfg.d is ignored.
inline DiffusionCase diffusion_case(const ChemostatConfig& cfg) {
    detail::require_two_volumes(cfg, "diffusion_case");
    const double mu_in = mu(cfg.growth, cfg.s_in);
    if (mu_in < cfg.Q / cfg.total_volume()) return DiffusionCase::I;
    if (mu_in <= cfg.Q / cfg.V1) return DiffusionCase::II;
    return DiffusionCase::III;
}

/// d_bar = V2 mu(s_in) (Q - V1 mu(s_in)) / (Q - V mu(s_in)); case I only.
inline double d_bar(const ChemostatConfig& cfg) {
    if (diffusion_case(cfg) != DiffusionCase::I) {
        throw UndefinedCaseError("d_bar: only finite when mu(s_in) < Q/V");
    }
    const double m = mu(cfg.growth, cfg.s_in);
    return cfg.V2 * m * (cfg.Q - cfg.V1 * m) / (cfg.Q - cfg.total_volume() * m);
}

/// Range of d over which the positive equilibrium exists; cfg.d is ignored.
inline ExistenceRange existence_range(const ChemostatConfig& cfg) {
    ExistenceRange r;
    r.diffusion_case = diffusion_case(cfg);
    switch (r.diffusion_case) {
        case DiffusionCase::I: r.d_hi = d_bar(cfg); break;
        case DiffusionCase::II: break;
        case DiffusionCase::III: r.includes_zero = true; break;
    }
    return r;
}

struct DiffusionLimits {
    /// s1*(0) = mu^{-1}(Q/V1), when mu(s_in) > Q/V1.
    std::optional<double> s1_star_0;
    /// lim s1*(d) as d -> infinity = mu^{-1}(Q/V), when mu(s_in) >= Q/V.
    std::optional<double> s1_star_inf;
};

inline DiffusionLimits limits(const ChemostatConfig& cfg) {
    detail::require_two_volumes(cfg, "limits");
    DiffusionLimits lim;
    const double mu_in = mu(cfg.growth, cfg.s_in);
    if (mu_in > cfg.Q / cfg.V1) lim.s1_star_0 = mu_inverse(cfg.growth, cfg.Q / cfg.V1);
    const double rate_v = cfg.Q / cfg.total_volume();
    if (mu_in >= rate_v) lim.s1_star_inf = mu_in == rate_v ? cfg.s_in : mu_inverse(cfg.growth, rate_v);
    return lim;
}

/// Positive equilibrium at diffusion d; throws UndefinedCaseError outside the existence range.
inline Equilibrium positive_equilibrium_at(const ChemostatConfig& cfg, double d) {
    auto eq = positive_equilibrium(cfg.with_d(d));
    if (!eq) {
        throw UndefinedCaseError("no positive equilibrium at d=" + std::to_string(d));
    }
    return *eq;
}

struct Sensitivity {
    double ds1_dd = 0.0;
    double ds2_dd = 0.0;
    double A = 0.0;
    double B = 0.0;
    double det_gamma = 0.0;
};

/**
 * @brief d-derivatives of the positive equilibrium.
 *
 * Differentiating the steady-state equations in d gives
 * Gamma (ds1, ds2)^T = (s2 - s1)(1, 1)^T with
 * Gamma = [[A + d, -d], [d, -B - d]], A = d (phi1'(s1) - 1), B = V2 beta'(s2).
 */
inline Sensitivity ds_dd(const ChemostatConfig& cfg, const Equilibrium& eq) {
    detail::require_two_volumes(cfg, "ds_dd");
    if (!(cfg.d > 0.0)) throw DomainError("ds_dd: requires d > 0");
    if (eq.kind != EquilibriumKind::Positive) throw DomainError("ds_dd: requires the positive equilibrium");
    const double d = cfg.d;
    const double s1 = eq.state.s1, s2 = eq.state.s2;
    const double p1 = phi1_prime(cfg, s1);
    const double p2 = phi2_prime(cfg, s2);
    Sensitivity out;
    out.A = d * (p1 - 1.0);
    out.B = cfg.V2 * beta_prime(cfg.growth, s2, cfg.s_in);
    out.det_gamma = d * d * (1.0 - p1 * p2);
    if (std::abs(out.det_gamma) < 1e-14 * d * d) {
        throw SingularityError("ds_dd: Gamma is singular at d=" + std::to_string(d));
    }
    out.ds1_dd = (s2 - s1) * (-out.B) / out.det_gamma;
    out.ds2_dd = (s2 - s1) * out.A / out.det_gamma;
    return out;
}

enum class DStarKind { Interior, Decreasing };

struct DStar {
    DStarKind kind = DStarKind::Decreasing;
    std::optional<double> d_star;
};

/**
 * @brief Diffusion rate minimising s1*(d): the root of s2*(d) = s_hat.
 *
 * The bracket is grown geometrically from d = Q (case I: from min(Q, d_bar/2)
 * and contracted toward d_bar), then bisected to 1e-12 relative in d.
 */
inline DStar find_d_star(const ChemostatConfig& cfg) {
    const auto range = existence_range(cfg);
    const double sh = s_hat(cfg.growth, cfg.s_in);
    if (range.diffusion_case != DiffusionCase::I) {
        const auto lim = limits(cfg);
        if (*lim.s1_star_inf <= sh) return {DStarKind::Decreasing, std::nullopt};
    }

    auto f = [&](double d) { return positive_equilibrium_at(cfg, d).state.s2 - sh; };
    const bool bounded = range.diffusion_case == DiffusionCase::I;
    double d0 = bounded ? std::min(cfg.Q, 0.5 * range.d_hi) : cfg.Q;
    double lo = d0, hi = d0;
    double f0 = f(d0);
    if (f0 == 0.0) return {DStarKind::Interior, d0};
    constexpr int kMaxExpansions = 2000;
    if (f0 < 0.0) {
        for (int k = 0;; ++k) {
            lo = hi;
            hi = bounded ? 0.5 * (hi + range.d_hi) : 2.0 * hi;
            if (f(hi) > 0.0) break;
            if (k > kMaxExpansions || (bounded && hi >= range.d_hi)) {
                throw InternalInconsistencyError("find_d_star: s2*(d) never exceeds s_hat");
            }
        }
    } else {
        for (int k = 0;; ++k) {
            hi = lo;
            lo = 0.5 * lo;
            if (f(lo) < 0.0) break;
            if (k > kMaxExpansions || lo == 0.0) {
                throw InternalInconsistencyError("find_d_star: s2*(d) never drops below s_hat");
            }
        }
    }
    const double d_star = roots::bisect(f, lo, hi, {.abs_tol = 1e-12 * hi, .max_iter = 200});
    return {DStarKind::Interior, d_star};
}

struct ProfileSample {
    double d = 0.0;
    double s1_star = std::numeric_limits<double>::quiet_NaN();
    double s2_star = std::numeric_limits<double>::quiet_NaN();
    /// NaN at d = 0, where the derivative system is undefined.
    double ds1_dd = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;
    std::string note;
};

struct DiffusionProfile {
    DiffusionCase diffusion_case = DiffusionCase::I;
    std::optional<double> d_bar;
    std::optional<double> s1_star_0;
    std::optional<double> s1_star_inf;
    DStar d_star;
    double s_hat = 0.0;
    std::vector<ProfileSample> samples;
};

struct SweepOptions {
    unsigned jobs = 1;
};

/**
 * @brief Log-spaced d grid inside the existence range.
 *
 * Case I: [1e-4 d_bar, stop_fraction d_bar]; otherwise [1e-4 Q, 1e4 Q].
 */
inline std::vector<double> default_d_grid(const ChemostatConfig& cfg, std::size_t points,
                                          double stop_fraction = 0.999) {
    const auto range = existence_range(cfg);
    double lo = 1e-4 * cfg.Q;
    double hi = 1e4 * cfg.Q;
    if (range.diffusion_case == DiffusionCase::I) {
        lo = 1e-4 * range.d_hi;
        hi = stop_fraction * range.d_hi;
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = lo * std::pow(hi / lo, t);
    }
    return grid;
}

/// Samples (d, s1*, s2*, ds1*/dd) along `grid`; points outside the existence range are flagged.
inline DiffusionProfile sweep(const ChemostatConfig& cfg, const std::vector<double>& grid,
                              const SweepOptions& opts = {}) {
    DiffusionProfile prof;
    const auto range = existence_range(cfg);
    prof.diffusion_case = range.diffusion_case;
    if (range.diffusion_case == DiffusionCase::I) prof.d_bar = range.d_hi;
    const auto lim = limits(cfg);
    prof.s1_star_0 = lim.s1_star_0;
    prof.s1_star_inf = lim.s1_star_inf;
    prof.s_hat = s_hat(cfg.growth, cfg.s_in);
    prof.d_star = find_d_star(cfg);

    prof.samples.resize(grid.size());
    parallel_for(grid.size(), opts.jobs, [&](std::size_t i) {
        ProfileSample& smp = prof.samples[i];
        smp.d = grid[i];
        if (!(grid[i] >= 0.0) || !range.contains(grid[i])) {
            smp.note = "outside existence range";
            return;
        }
        const auto c = cfg.with_d(grid[i]);
        const auto eq = positive_equilibrium(c);
        if (!eq) {
            smp.note = "no positive equilibrium";
            return;
        }
        smp.s1_star = eq->state.s1;
        smp.s2_star = eq->state.s2;
        smp.valid = true;
        if (grid[i] > 0.0) {
            try {
                smp.ds1_dd = ds_dd(c, *eq).ds1_dd;
            } catch (const SingularityError& e) {
                smp.note = e.what();
            }
        }
    });
    return prof;
}

}  // namespace latchem
