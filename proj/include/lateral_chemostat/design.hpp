#pragma once

/**
 * @file design.hpp
 * @brief Minimal total volume reaching a prescribed outlet concentration s_ref.
 *
 * With s1 = s_ref imposed at steady state, the volumes are functions of s2:
 *
 *   V1 = v1(s2) = Q g(s_ref)(s_in - s_ref) + d g(s_ref)(s2 - s_ref)
 *   V2 = v2(s2) = d g(s2)(s_ref - s2)
 *
 * so V1 + V2 = Q g(s_ref)(s_in - s_ref) + d G(s2) with
 * G(s) = (g(s_ref) - g(s))(s - s_ref), minimised over s2 in [alpha, s_ref],
 * alpha = max(0, s_ref - Q/d (s_in - s_ref)). The first term is the volume
 * of the single chemostat, Q / mu(s_ref).
 */

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "parallel.hpp"
#include "roots.hpp"

namespace latchem {

struct DesignSpec {
    double Q = 1.0;
    double s_in = 1.0;
    double s_ref = 0.5;
    GrowthModel growth = GrowthModel::monod(1.0, 1.0);
    /// Fixed diffusion rate; absent means d is optimised as well.
    std::optional<double> d;

    void validate() const {
        if (!std::isfinite(Q) || !(Q > 0.0)) throw ValidationError("design: Q must be positive");
        if (!std::isfinite(s_in) || !(s_in > 0.0)) throw ValidationError("design: s_in must be positive");
        if (!(s_ref > 0.0) || !(s_ref < s_in)) {
            throw ValidationError("design: s_ref must lie in (0, s_in)");
        }
        if (d && (!std::isfinite(*d) || *d < 0.0)) throw ValidationError("design: d must be nonnegative");
        if (s_in > growth.domain_max()) throw ValidationError("design: s_in beyond the growth domain");
    }
};

enum class DesignKind { SingleMixedTank, TwoTanks, SingleLateralTank };

inline const char* to_string(DesignKind k) {
    switch (k) {
        case DesignKind::SingleMixedTank: return "single_mixed_tank";
        case DesignKind::TwoTanks: return "two_tanks";
        case DesignKind::SingleLateralTank: return "single_lateral_tank";
    }
    return "unknown";
}

struct DesignResult {
    DesignKind kind = DesignKind::SingleMixedTank;
    double V1 = 0.0;
    double V2 = 0.0;
    double d = 0.0;
    /// Any d in [0, inf) is optimal; `d` is then reported as 0.
    bool d_any = false;
    double s2_opt = 0.0;
    double total_volume = 0.0;
    double baseline_volume = 0.0;
    double residence_time = 0.0;
    std::optional<double> alpha;
    std::optional<double> s_G;
};

/// Q / mu(s_ref): the single perfectly mixed tank reaching s_ref.
inline double single_tank_volume(const DesignSpec& spec) {
    const double m = mu(spec.growth, spec.s_ref);
    if (!(m > 0.0)) throw DomainError("single_tank_volume: mu(s_ref) must be positive");
    return spec.Q / m;
}

inline double alpha(const DesignSpec& spec, double d) {
    if (!(d > 0.0)) throw DomainError("alpha: requires d > 0");
    return std::max(0.0, spec.s_ref - spec.Q / d * (spec.s_in - spec.s_ref));
}

/// G(s) = (g(s_ref) - g(s))(s - s_ref)
inline double G(const DesignSpec& spec, double s) {
    return (g(spec.growth, spec.s_ref, spec.s_in) - g(spec.growth, s, spec.s_in)) * (s - spec.s_ref);
}

inline double G_prime(const DesignSpec& spec, double s) {
    return g(spec.growth, spec.s_ref, spec.s_in) - g(spec.growth, s, spec.s_in) -
           g_prime(spec.growth, s, spec.s_in) * (s - spec.s_ref);
}

inline double v1(const DesignSpec& spec, double d, double s2) {
    const double gr = g(spec.growth, spec.s_ref, spec.s_in);
    return spec.Q * gr * (spec.s_in - spec.s_ref) + d * gr * (s2 - spec.s_ref);
}

inline double v2(const DesignSpec& spec, double d, double s2) {
    return d * g(spec.growth, s2, spec.s_in) * (spec.s_ref - s2);
}

/// The point below s_hat where g takes the value g(s_ref); requires s_ref > s_hat.
inline double reflected_s_ref(const DesignSpec& spec) {
    const double sh = s_hat(spec.growth, spec.s_in);
    if (!(spec.s_ref > sh)) throw UndefinedCaseError("reflected_s_ref: requires s_ref > s_hat");
    const double target = beta(spec.growth, spec.s_ref, spec.s_in);
    return roots::bisect([&](double s) { return beta(spec.growth, s, spec.s_in) - target; }, 0.0, sh,
                         {.abs_tol = 1e-14 * spec.s_in, .max_iter = 200});
}

/**
 * @brief Unique minimiser of G on (s_bar_ref, s_hat), i.e. the root of g' = H
 * with H(s) = (g(s_ref) - g(s)) / (s - s_ref).
 *
 * On that interval g' increases through 0 and H decreases from 0, so
 * g' - H changes sign exactly once.
 */
inline double s_G(const DesignSpec& spec) {
    const double sh = s_hat(spec.growth, spec.s_in);
    if (!(spec.s_ref > sh)) throw UndefinedCaseError("s_G: requires s_ref > s_hat");
    const double lo = reflected_s_ref(spec);
    const double g_ref = g(spec.growth, spec.s_ref, spec.s_in);
    auto f = [&](double s) {
        const double H = (g_ref - g(spec.growth, s, spec.s_in)) / (s - spec.s_ref);
        return g_prime(spec.growth, s, spec.s_in) - H;
    };
    return roots::bisect(f, lo, sh, {.abs_tol = 1e-14 * spec.s_in, .max_iter = 200});
}

namespace detail {

inline DesignResult finish(const DesignSpec& spec, DesignResult r) {
    r.baseline_volume = single_tank_volume(spec);
    if (r.kind == DesignKind::TwoTanks && r.V1 < 1e-12 * r.baseline_volume) {
        r.V1 = 0.0;
        r.kind = DesignKind::SingleLateralTank;
    }
    r.total_volume = r.V1 + r.V2;
    r.residence_time = r.total_volume / spec.Q;
    return r;
}

inline DesignResult single_mixed(const DesignSpec& spec, double d) {
    DesignResult r;
    r.kind = DesignKind::SingleMixedTank;
    r.V1 = single_tank_volume(spec);
    r.V2 = 0.0;
    r.d = d;
    r.s2_opt = spec.s_ref;
    return r;
}

}  // namespace detail

/**
 * @brief Minimal (V1, V2) at fixed diffusion rate d.
 *
 *   s_hat >= s_ref          single mixed tank, V1 = Q / mu(s_ref)
 *   alpha < s_hat < s_ref   s2 = s_G if alpha <= s_G, else alpha (V1 = 0)
 *   s_hat <= alpha          single lateral tank, s2 = alpha
 *
 * d = 0 disconnects the second tank and returns the single mixed tank.
 */
inline DesignResult design_fixed_d(const DesignSpec& spec, double d) {
    spec.validate();
    if (!std::isfinite(d) || d < 0.0) throw ValidationError("design_fixed_d: d must be nonnegative");
    if (d == 0.0) return detail::finish(spec, detail::single_mixed(spec, 0.0));

    const double sh = s_hat(spec.growth, spec.s_in);
    const double a = alpha(spec, d);
    DesignResult r;
    if (sh >= spec.s_ref) {
        r = detail::single_mixed(spec, d);
        r.alpha = a;
        return detail::finish(spec, r);
    }
    r.d = d;
    r.alpha = a;
    r.s_G = s_G(spec);
    if (sh <= a) {
        r.kind = DesignKind::SingleLateralTank;
        r.s2_opt = a;
        r.V1 = 0.0;
        r.V2 = v2(spec, d, a);
        return detail::finish(spec, r);
    }
    r.s2_opt = a <= *r.s_G ? *r.s_G : a;
    r.kind = DesignKind::TwoTanks;
    r.V1 = std::max(0.0, v1(spec, d, r.s2_opt));
    r.V2 = v2(spec, d, r.s2_opt);
    return detail::finish(spec, r);
}

inline DesignResult design_fixed_d(const DesignSpec& spec) {
    if (!spec.d) throw ValidationError("design_fixed_d: spec has no diffusion rate");
    return design_fixed_d(spec, *spec.d);
}

/**
 * @brief Minimal (V1, V2, d).
 *
 * s_hat < s_ref: single lateral tank, V2* = Q (s_in - s_ref) g(s_hat),
 * d* = Q (s_in - s_ref) / (s_ref - s_hat). Otherwise the single mixed tank
 * for any d (d_any).
 */
inline DesignResult design_free_d(const DesignSpec& spec) {
    spec.validate();
    const double sh = s_hat(spec.growth, spec.s_in);
    if (sh >= spec.s_ref) {
        auto r = detail::single_mixed(spec, 0.0);
        r.d_any = true;
        return detail::finish(spec, r);
    }
    DesignResult r;
    r.kind = DesignKind::SingleLateralTank;
    r.d = spec.Q * (spec.s_in - spec.s_ref) / (spec.s_ref - sh);
    r.V1 = 0.0;
    r.V2 = spec.Q * (spec.s_in - spec.s_ref) * g(spec.growth, sh, spec.s_in);
    r.s2_opt = sh;
    r.alpha = alpha(spec, r.d);
    r.s_G = s_G(spec);
    return detail::finish(spec, r);
}

/// d* of the free-d problem, when s_hat < s_ref.
inline std::optional<double> optimal_diffusion(const DesignSpec& spec) {
    const double sh = s_hat(spec.growth, spec.s_in);
    if (!(sh < spec.s_ref)) return std::nullopt;
    return spec.Q * (spec.s_in - spec.s_ref) / (spec.s_ref - sh);
}

struct VolumeSample {
    double d = 0.0;
    double total_volume = std::numeric_limits<double>::quiet_NaN();
    DesignKind kind = DesignKind::SingleMixedTank;
    bool valid = false;
    std::string note;
};

/// Optimal total volume V_opt(d) along `grid`; failing points are flagged.
inline std::vector<VolumeSample> volume_curve(const DesignSpec& spec, const std::vector<double>& grid,
                                              unsigned jobs = 1) {
    spec.validate();
    std::vector<VolumeSample> out(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t i) {
        out[i].d = grid[i];
        try {
            const auto r = design_fixed_d(spec, grid[i]);
            out[i].total_volume = r.total_volume;
            out[i].kind = r.kind;
            out[i].valid = true;
        } catch (const std::exception& e) {
            out[i].note = e.what();
        }
    });
    return out;
}

/// Chemostat realising a design result.
inline ChemostatConfig to_config(const DesignSpec& spec, const DesignResult& r) {
    ChemostatConfig c;
    c.V1 = r.V1;
    c.V2 = r.V2;
    c.Q = spec.Q;
    c.s_in = spec.s_in;
    c.d = r.d;
    c.growth = spec.growth;
    return c;
}

}  // namespace latchem
