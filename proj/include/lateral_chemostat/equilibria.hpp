#pragma once

/**
 * @file equilibria.hpp
 * @brief Steady states of the lateral-compartment chemostat and their stability.
 *
 * At any steady state s_i + x_i = s_in, so equilibria are pairs (s1, s2)
 * solving
 *
 *   0 = (Q/V1 - mu(s1)) (s_in - s1) + d/V1 (s2 - s1)
 *   0 = -mu(s2) (s_in - s2)          + d/V2 (s1 - s2)
 *
 * The washout (s_in, s_in) always exists. A positive equilibrium exists
 * iff mu(s_in) > Q/V1 or P(mu(s_in)) < 0 with
 * P(X) = V1 V2 X^2 - (d V1 + (Q + d) V2) X + d Q, and it is unique. It is
 * located as the root of gamma(s2) = phi2(s2) - phi1^{-1}(s2).
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dynamics.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "roots.hpp"

namespace latchem {

enum class EquilibriumKind { Washout, Positive };

enum class Stability { LocallyExpStable, Saddle, NonHyperbolic };

inline const char* to_string(EquilibriumKind k) {
    return k == EquilibriumKind::Washout ? "washout" : "positive";
}

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::LocallyExpStable: return "locally_exp_stable";
        case Stability::Saddle: return "saddle";
        case Stability::NonHyperbolic: return "non_hyperbolic";
    }
    return "unknown";
}

struct Equilibrium {
    EquilibriumKind kind = EquilibriumKind::Washout;
    State state;
    std::vector<std::complex<double>> eigenvalues;
    Stability stability = Stability::LocallyExpStable;
};

struct StabilityReport {
    Stability stability = Stability::LocallyExpStable;
    /// Full spectrum: 4 values for two tanks, 2 for the reduced models.
    std::vector<std::complex<double>> eigenvalues;
    /// Two-tank case only: the z-block A and the s-block J_a.
    std::vector<std::complex<double>> a_eigenvalues;
    std::vector<std::complex<double>> ja_eigenvalues;
    double trace_ja = 0.0;
    double det_ja = 0.0;
};

/// P(X) = V1 V2 X^2 - (d V1 + (Q + d) V2) X + d Q
inline double washout_polynomial(const ChemostatConfig& cfg, double X) {
    return cfg.V1 * cfg.V2 * X * X - (cfg.d * cfg.V1 + (cfg.Q + cfg.d) * cfg.V2) * X + cfg.d * cfg.Q;
}

/// P evaluated at mu(s_in).
inline double washout_polynomial(const ChemostatConfig& cfg) {
    return washout_polynomial(cfg, mu(cfg.growth, cfg.s_in));
}

/// True iff the washout is the only steady state.
inline bool washout_is_unique(const ChemostatConfig& cfg) {
    const double mu_in = mu(cfg.growth, cfg.s_in);
    if (cfg.V1 == 0.0) return effective_dilution(cfg) >= mu_in;
    // Decoupled or single tank: only tank 1 decides.
    if (cfg.d == 0.0 || cfg.V2 == 0.0) return mu_in <= cfg.Q / cfg.V1;
    return mu_in <= cfg.Q / cfg.V1 && washout_polynomial(cfg, mu_in) >= 0.0;
}

namespace detail {

inline void require_coupled(const ChemostatConfig& cfg, const char* what) {
    if (!(cfg.d > 0.0)) throw DomainError(std::string(what) + ": requires d > 0");
}

}  // namespace detail

/// phi1(s1) = s1 - (Q - V1 mu(s1)) (s_in - s1) / d
inline double phi1(const ChemostatConfig& cfg, double s1) {
    detail::require_coupled(cfg, "phi1");
    return s1 - (cfg.Q - cfg.V1 * mu(cfg.growth, s1)) * (cfg.s_in - s1) / cfg.d;
}

/// phi2(s2) = s2 + V2 mu(s2) (s_in - s2) / d
inline double phi2(const ChemostatConfig& cfg, double s2) {
    detail::require_coupled(cfg, "phi2");
    return s2 + cfg.V2 * beta(cfg.growth, s2, cfg.s_in) / cfg.d;
}

inline double phi1_prime(const ChemostatConfig& cfg, double s1) {
    detail::require_coupled(cfg, "phi1_prime");
    return 1.0 + cfg.V1 / cfg.d * mu_prime(cfg.growth, s1) * (cfg.s_in - s1) +
           (cfg.Q - cfg.V1 * mu(cfg.growth, s1)) / cfg.d;
}

inline double phi2_prime(const ChemostatConfig& cfg, double s2) {
    detail::require_coupled(cfg, "phi2_prime");
    return 1.0 + cfg.V2 / cfg.d * beta_prime(cfg.growth, s2, cfg.s_in);
}

/// Largest s1 in [0, s_in] with mu(s1) <= Q/V1.
inline double lambda1(const ChemostatConfig& cfg) {
    if (!(cfg.V1 > 0.0)) throw DomainError("lambda1: requires V1 > 0");
    const double rate = cfg.Q / cfg.V1;
    if (mu(cfg.growth, cfg.s_in) <= rate) return cfg.s_in;
    return std::min(cfg.s_in, mu_inverse(cfg.growth, rate));
}

inline roots::BisectionOptions equilibrium_bisection(const ChemostatConfig& cfg) {
    return {.abs_tol = 1e-12 * cfg.s_in, .max_iter = 200};
}

/// Inverse of phi1 restricted to [0, lambda1], where phi1 is increasing.
inline double phi1_inverse(const ChemostatConfig& cfg, double y, double lam1) {
    // phi1(lambda1) = lambda1 up to the rounding of mu^{-1}.
    if (phi1(cfg, lam1) <= y) return lam1;
    return roots::bisect([&](double s1) { return phi1(cfg, s1) - y; }, 0.0, lam1,
                         equilibrium_bisection(cfg));
}

inline double phi1_inverse(const ChemostatConfig& cfg, double y) {
    return phi1_inverse(cfg, y, lambda1(cfg));
}

/// gamma(s2) = phi2(s2) - phi1^{-1}(s2) on [0, lambda1].
inline double gamma_fn(const ChemostatConfig& cfg, double s2, double lam1) {
    return phi2(cfg, s2) - phi1_inverse(cfg, s2, lam1);
}

inline double gamma_fn(const ChemostatConfig& cfg, double s2) {
    return gamma_fn(cfg, s2, lambda1(cfg));
}

/// Jacobian of the four-dimensional model in (z1, s1, z2, s2) coordinates.
inline Eigen::Matrix4d jacobian_zs(const ChemostatConfig& cfg, const State& y) {
    const auto zs = to_zs(y, cfg.s_in);
    const double m1 = mu(cfg.growth, y.s1), m2 = mu(cfg.growth, y.s2);
    const double dm1 = mu_prime(cfg.growth, y.s1), dm2 = mu_prime(cfg.growth, y.s2);
    const double V1 = cfg.V1, V2 = cfg.V2, Q = cfg.Q, d = cfg.d;
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    // z1' = -(Q + d)/V1 z1 + d/V1 z2
    J(0, 0) = -(Q + d) / V1;
    J(0, 2) = d / V1;
    // s1' = -mu(s1)(s_in - s1 - z1) + Q/V1 (s_in - s1) + d/V1 (s2 - s1)
    J(1, 0) = m1;
    J(1, 1) = -dm1 * (cfg.s_in - y.s1 - zs.z1) + m1 - (Q + d) / V1;
    J(1, 3) = d / V1;
    // z2' = d/V2 (z1 - z2)
    J(2, 0) = d / V2;
    J(2, 2) = -d / V2;
    // s2' = -mu(s2)(s_in - s2 - z2) + d/V2 (s1 - s2)
    J(3, 1) = d / V2;
    J(3, 2) = m2;
    J(3, 3) = -dm2 * (cfg.s_in - y.s2 - zs.z2) + m2 - d / V2;
    return J;
}

namespace detail {

inline std::vector<std::complex<double>> eig2(double tr, double det) {
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        // Stable form of the quadratic roots.
        const double q = -0.5 * (tr + std::copysign(r, tr));
        if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
        return {{-q, 0.0}, {-det / q, 0.0}};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {{0.5 * tr, im}, {0.5 * tr, -im}};
}

inline Stability classify_spectrum(const std::vector<std::complex<double>>& ev, double scale) {
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& e : ev) max_re = std::max(max_re, e.real());
    if (std::abs(max_re) <= 1e-12 * scale) return Stability::NonHyperbolic;
    return max_re < 0.0 ? Stability::LocallyExpStable : Stability::Saddle;
}

inline StabilityReport single_tank_report(const ChemostatConfig& cfg, double dilution,
                                          const State& y, bool washout) {
    // (z, s) Jacobian of s' = -mu(s)(s_in - s - z) + D (s_in - s), z' = -D z
    StabilityReport r;
    if (washout) {
        const double lead = mu(cfg.growth, cfg.s_in) - dilution;
        r.eigenvalues = {{-dilution, 0.0}, {lead, 0.0}};
        if (std::abs(lead) <= 1e-12 * dilution) r.stability = Stability::NonHyperbolic;
        else r.stability = lead > 0.0 ? Stability::Saddle : Stability::LocallyExpStable;
    } else {
        const double s = cfg.V1 == 0.0 ? y.s2 : y.s1;
        const double lead = -mu_prime(cfg.growth, s) * (cfg.s_in - s);
        r.eigenvalues = {{-dilution, 0.0}, {lead, 0.0}};
        r.stability = classify_spectrum(r.eigenvalues, dilution);
    }
    return r;
}

}  // namespace detail

/**
 * @brief Spectrum and stability verdict of an equilibrium.
 *
 * Two-tank configurations: the 4x4 (z, s) Jacobian is block triangular with
 * diagonal blocks A (z-dynamics) and J_a (s-dynamics); its spectrum is
 * computed numerically, J_a's trace and determinant analytically. The
 * washout is NonHyperbolic when det(J_a) vanishes (|phi1' phi2' - 1| <= 1e-12),
 * a Saddle when P(mu(s_in)) < 0 or mu(s_in) > Q/V1, stable otherwise.
 */
inline StabilityReport classify_stability(const ChemostatConfig& cfg, const Equilibrium& eq) {
    const bool washout = eq.kind == EquilibriumKind::Washout;
    switch (topology(cfg)) {
        case Topology::LateralOnly:
            return detail::single_tank_report(cfg, effective_dilution(cfg), eq.state, washout);
        case Topology::SingleChemostat:
            return detail::single_tank_report(cfg, cfg.Q / cfg.V1, eq.state, washout);
        case Topology::TwoTanks: break;
    }

    StabilityReport r;
    const Eigen::Matrix4d J = jacobian_zs(cfg, eq.state);
    Eigen::EigenSolver<Eigen::Matrix4d> solver(J, false);
    for (int i = 0; i < 4; ++i) r.eigenvalues.push_back(solver.eigenvalues()[i]);
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    const double V1 = cfg.V1, V2 = cfg.V2, d = cfg.d;
    const double p1 = phi1_prime(cfg, eq.state.s1);
    const double p2 = phi2_prime(cfg, eq.state.s2);
    r.trace_ja = -d * (p1 / V1 + p2 / V2);
    r.det_ja = d * d / (V1 * V2) * (p1 * p2 - 1.0);
    r.ja_eigenvalues = detail::eig2(r.trace_ja, r.det_ja);
    const double tr_a = -(cfg.Q + d) / V1 - d / V2;
    const double det_a = cfg.Q * d / (V1 * V2);
    r.a_eigenvalues = detail::eig2(tr_a, det_a);

    if (washout) {
        const double mu_in = mu(cfg.growth, cfg.s_in);
        if (std::abs(p1 * p2 - 1.0) <= 1e-12) {
            r.stability = Stability::NonHyperbolic;
        } else if (washout_polynomial(cfg, mu_in) < 0.0 || mu_in > cfg.Q / V1) {
            r.stability = Stability::Saddle;
        } else {
            r.stability = Stability::LocallyExpStable;
        }
    } else {
        double scale = 0.0;
        for (const auto& e : r.eigenvalues) scale = std::max(scale, std::abs(e));
        r.stability = detail::classify_spectrum(r.eigenvalues, scale);
    }
    return r;
}

inline Equilibrium with_stability(const ChemostatConfig& cfg, Equilibrium eq) {
    auto rep = classify_stability(cfg, eq);
    eq.eigenvalues = std::move(rep.eigenvalues);
    eq.stability = rep.stability;
    return eq;
}

/// E0 = (s_in, 0, s_in, 0), classified.
inline Equilibrium washout_equilibrium(const ChemostatConfig& cfg) {
    cfg.validate();
    Equilibrium eq{EquilibriumKind::Washout, {cfg.s_in, 0.0, cfg.s_in, 0.0}, {}, {}};
    return with_stability(cfg, eq);
}

namespace detail {

inline std::optional<Equilibrium> positive_two_tanks(const ChemostatConfig& cfg) {
    const double lam1 = lambda1(cfg);
    auto gam = [&](double s2) { return gamma_fn(cfg, s2, lam1); };

    double hi = lam1;
    if (!(lam1 < cfg.s_in)) {
        // gamma(s_in) = 0 with gamma'(s_in) < 0: step back until gamma > 0.
        double delta = 0.1 * cfg.s_in;
        bool found = false;
        for (int k = 0; k < 200 && delta > 0.0; ++k, delta *= 0.5) {
            if (gam(cfg.s_in - delta) > 0.0) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw InternalInconsistencyError(
                "positive_equilibrium: no positive value of gamma below s_in although P(mu(s_in)) < 0");
        }
        hi = cfg.s_in - delta;
    }
    if (!(gam(0.0) < 0.0) || !(gam(hi) > 0.0)) {
        throw InternalInconsistencyError("positive_equilibrium: gamma does not change sign on (0, " +
                                         std::to_string(hi) + ")");
    }
    double s2 = roots::bisect(gam, 0.0, hi, equilibrium_bisection(cfg));

    // Polish on s2 - phi1(phi2(s2)), which has the sign of -gamma and needs no inversion.
    auto tank1 = [&](double s) { return s - phi1(cfg, phi2(cfg, s)); };
    for (double w = equilibrium_bisection(cfg).abs_tol; w <= 64.0 * equilibrium_bisection(cfg).abs_tol; w *= 4.0) {
        if (const auto r = roots::illinois(tank1, std::max(0.0, s2 - w), std::min(hi, s2 + w))) {
            s2 = *r;
            break;
        }
    }
    const double s1 = phi2(cfg, s2);
    return Equilibrium{EquilibriumKind::Positive, {s1, cfg.s_in - s1, s2, cfg.s_in - s2}, {}, {}};
}

}  // namespace detail

/**
 * @brief The unique positive equilibrium, or nullopt when the washout is the
 * only steady state.
 *
 * Degenerate topologies: V1 = 0 solves the lateral tank at its effective
 * dilution and reports the outlet concentrations as (s1, x1). V2 = 0 or
 * d = 0 solve the single chemostat of volume V1; tank 2 then either mirrors
 * tank 1 (V2 = 0) or takes its d -> 0+ limit s2 = 0, x2 = s_in (d = 0).
 */
inline std::optional<Equilibrium> positive_equilibrium(const ChemostatConfig& cfg) {
    cfg.validate();
    if (washout_is_unique(cfg)) return std::nullopt;

    std::optional<Equilibrium> eq;
    switch (topology(cfg)) {
        case Topology::LateralOnly: {
            const double s2 = mu_inverse(cfg.growth, effective_dilution(cfg));
            const double x2 = cfg.s_in - s2;
            const auto out = outlet_concentrations(cfg, s2, x2);
            eq = Equilibrium{EquilibriumKind::Positive, {out.s_out, out.x_out, s2, x2}, {}, {}};
            break;
        }
        case Topology::SingleChemostat: {
            const double s1 = mu_inverse(cfg.growth, cfg.Q / cfg.V1);
            const double x1 = cfg.s_in - s1;
            const State y = cfg.V2 == 0.0 ? State{s1, x1, s1, x1} : State{s1, x1, 0.0, cfg.s_in};
            eq = Equilibrium{EquilibriumKind::Positive, y, {}, {}};
            break;
        }
        case Topology::TwoTanks:
            eq = detail::positive_two_tanks(cfg);
            break;
    }
    return with_stability(cfg, *eq);
}

struct EquilibriumReport {
    bool washout_unique = true;
    Equilibrium washout;
    std::optional<Equilibrium> positive;

    /// The equilibrium almost every trajectory converges to.
    [[nodiscard]] const Equilibrium& attractor() const { return positive ? *positive : washout; }
};

inline EquilibriumReport analyze_equilibria(const ChemostatConfig& cfg) {
    EquilibriumReport rep;
    rep.washout = washout_equilibrium(cfg);
    rep.positive = positive_equilibrium(cfg);
    rep.washout_unique = !rep.positive.has_value();
    return rep;
}

/// Residuals of the two steady-state equations at (s1, s2); requires V1, V2 > 0.
inline std::pair<double, double> steady_state_residuals(const ChemostatConfig& cfg, double s1,
                                                        double s2) {
    const double r1 = (cfg.Q / cfg.V1 - mu(cfg.growth, s1)) * (cfg.s_in - s1) +
                      cfg.d / cfg.V1 * (s2 - s1);
    const double r2 = -mu(cfg.growth, s2) * (cfg.s_in - s2) + cfg.d / cfg.V2 * (s1 - s2);
    return {r1, r2};
}

}  // namespace latchem
