#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "errors.hpp"

namespace latchem::roots {

struct BisectionOptions {
    double abs_tol = 1e-12;
    int max_iter = 200;
};

/**
 * @brief Bracketed bisection for a sign change of f on [lo, hi].
 *
 * Stops when the bracket is narrower than abs_tol, when the midpoint can no
 * longer be distinguished from an endpoint, or after max_iter halvings.
 * An exact zero at an endpoint is returned as is.
 */
template <class F>
double bisect(F&& f, double lo, double hi, const BisectionOptions& opts = {}) {
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (std::signbit(f_lo) == std::signbit(f_hi)) {
        throw BracketError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    }
    for (int it = 0; it < opts.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= opts.abs_tol || mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return 0.5 * (lo + hi);
}

/**
 * @brief Illinois-modified regula falsi on a bracket [lo, hi].
 *
 * Used to polish a root already isolated by bisection. Returns std::nullopt
 * when f does not change sign on the bracket.
 */
template <class F>
std::optional<double> illinois(F&& f, double lo, double hi, int max_iter = 100) {
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (std::signbit(f_lo) == std::signbit(f_hi)) return std::nullopt;
    int side = 0;
    for (int it = 0; it < max_iter; ++it) {
        double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        if (x <= lo || x >= hi) break;
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (std::signbit(fx) == std::signbit(f_lo)) {
            lo = x;
            f_lo = fx;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
    }
    return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
}

/// Golden-section search for the minimizer of a unimodal f on [lo, hi].
template <class F>
double golden_section_min(F&& f, double lo, double hi, double abs_tol = 1e-12,
                          int max_iter = 500) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > abs_tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace latchem::roots
