#pragma once

/**
 * @file dynamics.hpp
 * @brief Two-tank chemostat with a lateral compartment coupled by diffusion.
 *
 * Tank 1 (volume V1) is crossed by the flow Q carrying substrate at s_in.
 * Tank 2 (volume V2) exchanges substrate and biomass with tank 1 at
 * diffusion rate d. Yield is normalised to 1:
 *
 *   s1' = -mu(s1) x1 + Q/V1 (s_in - s1) + d/V1 (s2 - s1)
 *   x1' =  mu(s1) x1 - Q/V1 x1          + d/V1 (x2 - x1)
 *   s2' = -mu(s2) x2                    + d/V2 (s1 - s2)
 *   x2' =  mu(s2) x2                    + d/V2 (x1 - x2)
 *
 * Limiting cases: V1 = 0 is a single tank hanging by diffusion off the
 * input pipe (effective dilution Qd/((Q+d)V2)); V2 = 0 or d = 0 is the
 * classical single chemostat of volume V1.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "growth.hpp"
#include "ode.hpp"

namespace latchem {

struct ChemostatConfig {
    double V1 = 1.0;
    double V2 = 1.0;
    double Q = 1.0;
    double s_in = 1.0;
    double d = 1.0;
    GrowthModel growth = GrowthModel::monod(1.0, 1.0);

    [[nodiscard]] double total_volume() const { return V1 + V2; }

    [[nodiscard]] ChemostatConfig with_d(double new_d) const {
        ChemostatConfig c = *this;
        c.d = new_d;
        return c;
    }

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(V1) || !finite(V2) || !finite(Q) || !finite(s_in) || !finite(d)) {
            throw ValidationError("chemostat: parameters must be finite");
        }
        if (!(Q > 0.0)) throw ValidationError("chemostat: Q must be positive");
        if (!(s_in > 0.0)) throw ValidationError("chemostat: s_in must be positive");
        if (V1 < 0.0 || V2 < 0.0) throw ValidationError("chemostat: volumes must be nonnegative");
        if (d < 0.0) throw ValidationError("chemostat: d must be nonnegative");
        if (V1 == 0.0 && V2 == 0.0) throw ValidationError("chemostat: at least one tank needs volume");
        if (V1 == 0.0 && d == 0.0) {
            throw ValidationError("chemostat: V1 = 0 requires d > 0 (lateral tank disconnected)");
        }
        if (s_in > growth.domain_max()) {
            throw ValidationError("chemostat: s_in beyond the growth law's domain");
        }
    }
};

/// Which model a configuration reduces to.
enum class Topology {
    TwoTanks,       ///< V1 > 0, V2 > 0, d > 0
    LateralOnly,    ///< V1 = 0: tank 2 fed by diffusion from the pipe
    SingleChemostat ///< V2 = 0 or d = 0: tank 1 alone
};

inline const char* to_string(Topology t) {
    switch (t) {
        case Topology::TwoTanks: return "two_tanks";
        case Topology::LateralOnly: return "lateral_only";
        case Topology::SingleChemostat: return "single_chemostat";
    }
    return "unknown";
}

inline Topology topology(const ChemostatConfig& cfg) {
    if (cfg.V1 == 0.0) return Topology::LateralOnly;
    if (cfg.V2 == 0.0 || cfg.d == 0.0) return Topology::SingleChemostat;
    return Topology::TwoTanks;
}

struct State {
    double s1 = 0.0;
    double x1 = 0.0;
    double s2 = 0.0;
    double x2 = 0.0;

    [[nodiscard]] std::array<double, 4> to_array() const { return {s1, x1, s2, x2}; }
    static State from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
    [[nodiscard]] double min_component() const { return std::min({s1, x1, s2, x2}); }
    [[nodiscard]] double max_abs() const {
        return std::max({std::abs(s1), std::abs(x1), std::abs(s2), std::abs(x2)});
    }
    friend bool operator==(const State&, const State&) = default;
};

/// Time derivative of a State.
using StateRate = State;

namespace detail {

// mu extended by 0 to negative arguments; RK stages may dip below zero.
inline double mu_ext(const GrowthModel& m, double s) { return s > 0.0 ? mu(m, s) : 0.0; }

inline StateRate rhs_unchecked(const ChemostatConfig& c, const State& y) {
    const double m1 = mu_ext(c.growth, y.s1);
    const double m2 = mu_ext(c.growth, y.s2);
    return {
        -m1 * y.x1 + c.Q / c.V1 * (c.s_in - y.s1) + c.d / c.V1 * (y.s2 - y.s1),
        m1 * y.x1 - c.Q / c.V1 * y.x1 + c.d / c.V1 * (y.x2 - y.x1),
        -m2 * y.x2 + c.d / c.V2 * (y.s1 - y.s2),
        m2 * y.x2 + c.d / c.V2 * (y.x1 - y.x2),
    };
}

}  // namespace detail

/// Right-hand side of the four-dimensional model. Requires V1, V2 > 0.
inline StateRate rhs(const ChemostatConfig& cfg, const State& state) {
    if (!(cfg.V1 > 0.0) || !(cfg.V2 > 0.0)) {
        throw DomainError("rhs: V1 and V2 must be positive; use the reduced models");
    }
    if (state.min_component() < 0.0) throw DomainError("rhs: negative state component");
    return detail::rhs_unchecked(cfg, state);
}

/// Dilution rate seen by the lateral tank when V1 = 0.
inline double effective_dilution(const ChemostatConfig& cfg) {
    return cfg.Q * cfg.d / ((cfg.Q + cfg.d) * cfg.V2);
}

/// Flow-equivalent of the diffusive coupling for the V1 = 0 configuration.
inline double effective_flow(const ChemostatConfig& cfg) { return cfg.Q * cfg.d / (cfg.Q + cfg.d); }

struct ReducedRate {
    double ds2 = 0.0;
    double dx2 = 0.0;
};

/// Dynamics of the lateral tank when V1 = 0.
inline ReducedRate rhs_reduced_v1_zero(const ChemostatConfig& cfg, double s2, double x2) {
    if (!(cfg.V2 > 0.0)) throw DomainError("rhs_reduced_v1_zero: V2 must be positive");
    if (!(cfg.d > 0.0)) throw DomainError("rhs_reduced_v1_zero: d = 0 disconnects the tank");
    const double D = effective_dilution(cfg);
    const double m = detail::mu_ext(cfg.growth, s2);
    return {-m * x2 + D * (cfg.s_in - s2), m * x2 - D * x2};
}

struct Outlet {
    double s_out = 0.0;
    double x_out = 0.0;
};

/// Mass balance at the pipe junction of the V1 = 0 configuration.
inline Outlet outlet_concentrations(const ChemostatConfig& cfg, double s2, double x2) {
    if (cfg.d < 0.0) throw DomainError("outlet_concentrations: negative d");
    const double den = cfg.Q + cfg.d;
    return {(cfg.Q * cfg.s_in + cfg.d * s2) / den, cfg.d * x2 / den};
}

/// (z1, s1, z2, s2) with z_i = s_in - s_i - x_i.
struct ZsCoordinates {
    double z1 = 0.0;
    double s1 = 0.0;
    double z2 = 0.0;
    double s2 = 0.0;
};

inline ZsCoordinates to_zs(const State& y, double s_in) {
    return {s_in - y.s1 - y.x1, y.s1, s_in - y.s2 - y.x2, y.s2};
}

inline State from_zs(const ZsCoordinates& zs, double s_in) {
    return {zs.s1, s_in - zs.s1 - zs.z1, zs.s2, s_in - zs.s2 - zs.z2};
}

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Linear z-subsystem z' = A z; always Hurwitz for V1, V2, d, Q > 0.
inline Mat2 z_matrix(const ChemostatConfig& cfg) {
    return {{{-(cfg.Q + cfg.d) / cfg.V1, cfg.d / cfg.V1}, {cfg.d / cfg.V2, -cfg.d / cfg.V2}}};
}

/// Steady state declared when ||rate||_inf < 1e-9 s_in.
inline bool is_steady(const ChemostatConfig& cfg, const StateRate& rate) {
    return rate.max_abs() < 1e-9 * cfg.s_in;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    ChemostatConfig config;
};

struct SimulationOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// Initial step; defaults to 1e-3 V / Q.
    std::optional<double> h0;
    long max_steps = 50'000'000;
    /// Stop as soon as the state is steady.
    bool stop_at_steady_state = false;
    /// Record every n-th accepted step (the final state is always recorded).
    int record_every = 1;
};

struct SimulationResult {
    Trajectory trajectory;
    bool reached_steady_state = false;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

/// Integration failed; carries the trajectory computed so far.
class IntegrationFailure : public std::runtime_error {
public:
    IntegrationFailure(const std::string& what, Trajectory partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    [[nodiscard]] const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

namespace detail {

template <std::size_t N, class Rhs, class ToState>
SimulationResult run_simulation(const ChemostatConfig& cfg, ode::Vec<N> y, double horizon,
                                const SimulationOptions& opts, Rhs&& f, ToState&& to_state) {
    SimulationResult out;
    out.trajectory.config = cfg;
    out.trajectory.times.push_back(0.0);
    out.trajectory.states.push_back(to_state(y));

    const double scale = cfg.total_volume() / cfg.Q;
    ode::Options o{opts.rtol, opts.atol, opts.h0.value_or(1e-3 * scale), opts.max_steps};
    const double neg_limit = -10.0 * opts.atol;
    const int stride = std::max(1, opts.record_every);
    long step = 0;
    std::string failure;

    auto on_step = [&](double t, ode::Vec<N>& yy, const ode::Vec<N>& dy) {
        for (double& v : yy) {
            if (v < neg_limit) {
                failure = "negative undershoot beyond -10 atol at t=" + std::to_string(t);
                out.trajectory.times.push_back(t);
                out.trajectory.states.push_back(to_state(yy));
                return ode::StepAction::Fail;
            }
            if (v < 0.0) v = 0.0;
        }
        ++step;
        bool steady = false;
        if (opts.stop_at_steady_state) {
            double m = 0.0;
            for (double v : dy) m = std::max(m, std::abs(v));
            steady = m < 1e-9 * cfg.s_in;
        }
        if (step % stride == 0 || t >= horizon || steady) {
            out.trajectory.times.push_back(t);
            out.trajectory.states.push_back(to_state(yy));
        }
        if (steady) {
            out.reached_steady_state = true;
            return ode::StepAction::Stop;
        }
        return ode::StepAction::Continue;
    };

    const ode::Result r = ode::integrate<N>(f, y, 0.0, horizon, o, on_step);
    out.accepted_steps = r.accepted;
    out.rejected_steps = r.rejected;
    if (out.trajectory.times.back() != r.t) {
        out.trajectory.times.push_back(r.t);
        out.trajectory.states.push_back(to_state(y));
    }
    switch (r.status) {
        case ode::Status::Reached:
        case ode::Status::Stopped:
            return out;
        case ode::Status::StepUnderflow:
            throw IntegrationFailure("simulate: step-size underflow at t=" + std::to_string(r.t),
                                     std::move(out.trajectory));
        case ode::Status::MaxSteps:
            throw IntegrationFailure("simulate: step budget exhausted at t=" + std::to_string(r.t),
                                     std::move(out.trajectory));
        case ode::Status::Rejected:
            throw IntegrationFailure("simulate: " + failure, std::move(out.trajectory));
    }
    return out;
}

}  // namespace detail

/**
 * @brief Integrates the model from `initial` over [0, horizon].
 *
 * Uses the full four-dimensional model, or the reduced model matching the
 * configuration's topology. For V1 = 0 the reported (s1, x1) are the outlet
 * concentrations; for the single chemostat (s2, x2) mirror tank 1 when V2 = 0.
 *
 * Negative excursions down to -10 atol are clamped to zero; anything lower
 * raises IntegrationFailure, as does step-size underflow.
 */
inline SimulationResult simulate(const ChemostatConfig& cfg, const State& initial, double horizon,
                                 const SimulationOptions& opts = {}) {
    cfg.validate();
    if (!(horizon > 0.0)) throw ValidationError("simulate: horizon must be positive");
    if (initial.min_component() < 0.0) throw ValidationError("simulate: negative initial state");

    switch (topology(cfg)) {
        case Topology::TwoTanks:
            return detail::run_simulation<4>(
                cfg, initial.to_array(), horizon, opts,
                [&](double, const ode::Vec<4>& y) {
                    return detail::rhs_unchecked(cfg, State::from_array(y)).to_array();
                },
                [](const ode::Vec<4>& y) { return State::from_array(y); });
        case Topology::LateralOnly:
            return detail::run_simulation<2>(
                cfg, {initial.s2, initial.x2}, horizon, opts,
                [&](double, const ode::Vec<2>& y) {
                    const auto r = rhs_reduced_v1_zero(cfg, y[0], y[1]);
                    return ode::Vec<2>{r.ds2, r.dx2};
                },
                [&](const ode::Vec<2>& y) {
                    const auto o = outlet_concentrations(cfg, y[0], y[1]);
                    return State{o.s_out, o.x_out, y[0], y[1]};
                });
        case Topology::SingleChemostat:
            if (cfg.V2 == 0.0) {
                const double D = cfg.Q / cfg.V1;
                return detail::run_simulation<2>(
                    cfg, {initial.s1, initial.x1}, horizon, opts,
                    [&](double, const ode::Vec<2>& y) {
                        const double m = detail::mu_ext(cfg.growth, y[0]);
                        return ode::Vec<2>{-m * y[1] + D * (cfg.s_in - y[0]), m * y[1] - D * y[1]};
                    },
                    [](const ode::Vec<2>& y) { return State{y[0], y[1], y[0], y[1]}; });
            }
            // d = 0: the coupling terms vanish and the full right-hand side applies.
            return detail::run_simulation<4>(
                cfg, initial.to_array(), horizon, opts,
                [&](double, const ode::Vec<4>& y) {
                    return detail::rhs_unchecked(cfg, State::from_array(y)).to_array();
                },
                [](const ode::Vec<4>& y) { return State::from_array(y); });
    }
    return {};
}

}  // namespace latchem
