#pragma once

/**
 * @file ode.hpp
 * @brief Adaptive Dormand-Prince 5(4) integrator on fixed-size state vectors.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>

namespace latchem::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Options {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h0 = 1e-3;
    long max_steps = 10'000'000;
    /// Cap on h rho as a fraction of the real stability boundary (about 3.3); 0 disables.
    double stability_fraction = 0.5;
};

enum class StepAction { Continue, Stop, Fail };

enum class Status { Reached, Stopped, StepUnderflow, MaxSteps, Rejected };

struct Result {
    Status status = Status::Reached;
    double t = 0.0;
    long accepted = 0;
    long rejected = 0;
};

namespace detail {

// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

/**
 * @brief Integrates y' = f(t, y) from t0 to t1 in place.
 *
 * After each accepted step `on_step(t, y, dydt)` is called with the FSAL
 * derivative at the new point; it may modify y (the derivative is then
 * re-evaluated) and decides whether to continue, stop early or fail.
 */
template <std::size_t N, class Rhs, class OnStep>
Result integrate(Rhs&& f, Vec<N>& y, double t0, double t1, const Options& opts, OnStep&& on_step) {
    using namespace detail;
    Result res;
    double t = t0;
    double h = std::min(opts.h0, t1 - t0);
    Vec<N> k1 = f(t, y), k2, k3, k4, k5, k6, k7, tmp, y6, y_new;
    constexpr double kStabilityBoundary = 3.3;

    auto axpy = [&](double hh, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
            tmp[i] = y[i] + hh * acc;
        }
        return tmp;
    };

    bool last_rejected = false;
    // PI step control (beta = 0.04) damps step-size oscillation on the stability boundary.
    constexpr double kBeta = 0.04;
    double err_old = 1e-4;
    while (t < t1) {
        if (res.accepted + res.rejected >= opts.max_steps) {
            res.status = Status::MaxSteps;
            res.t = t;
            return res;
        }
        const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < h_min) {
            res.status = Status::StepUnderflow;
            res.t = t;
            return res;
        }
        if (t + h > t1) h = t1 - t;

        k2 = f(t + c2 * h, axpy(h, {{a21, &k1}}));
        k3 = f(t + c3 * h, axpy(h, {{a31, &k1}, {a32, &k2}}));
        k4 = f(t + c4 * h, axpy(h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        k5 = f(t + c5 * h, axpy(h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        y6 = axpy(h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        k6 = f(t + h, y6);
        y_new = axpy(h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        k7 = f(t + h, y_new);

        double err2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err2 += (e / sc) * (e / sc);
        }
        const double err = std::sqrt(err2 / static_cast<double>(N));

        if (err <= 1.0 && std::isfinite(err)) {
            t = (t + h >= t1) ? t1 : t + h;
            y = y_new;
            k1 = k7;
            ++res.accepted;
            const Vec<N> before = y;
            const StepAction act = on_step(t, y, k1);
            if (y != before) k1 = f(t, y);
            if (act == StepAction::Stop) {
                res.status = Status::Stopped;
                res.t = t;
                return res;
            }
            if (act == StepAction::Fail) {
                res.status = Status::Rejected;
                res.t = t;
                return res;
            }
            double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -(0.2 - 0.75 * kBeta)) * std::pow(err_old, kBeta);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h *= fac;
            err_old = std::max(err, 1e-4);
            if (opts.stability_fraction > 0.0) {
                // Spectral radius estimate from the two stages at t + h.
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    num += (k7[i] - k6[i]) * (k7[i] - k6[i]);
                    den += (y_new[i] - y6[i]) * (y_new[i] - y6[i]);
                }
                if (den > 0.0 && num > 0.0) {
                    h = std::min(h, opts.stability_fraction * kStabilityBoundary * std::sqrt(den / num));
                }
            }
            last_rejected = false;
        } else {
            ++res.rejected;
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            last_rejected = true;
        }
    }
    res.status = Status::Reached;
    res.t = t;
    return res;
}

}  // namespace latchem::ode
