#pragma once

/**
 * @file growth.hpp
 * @brief Specific growth laws and the scalar functions built on them.
 *
 * A growth law mu is increasing, concave and vanishes at zero. From it and
 * the inlet concentration s_in we derive the production rate
 * beta(s) = mu(s) (s_in - s), its maximizer s_hat, and the volume cost
 * density g(s) = 1 / beta(s).
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "roots.hpp"

namespace latchem {

/// mu(s) = mu_max s / (K + s)
struct Monod {
    double mu_max = 1.0;
    double K = 1.0;
};

/**
 * @brief Piecewise-linear growth law through validated samples.
 *
 * Samples must start at (0, 0), be strictly increasing in both coordinates
 * and have non-increasing chord slopes. The law is defined on
 * [0, s.back()]; its supremum is taken as mu.back().
 */
class Tabulated {
public:
    Tabulated(std::vector<double> s, std::vector<double> mu) : s_(std::move(s)), mu_(std::move(mu)) {
        if (s_.size() != mu_.size() || s_.size() < 2) {
            throw ValidationError("tabulated growth: need at least two (s, mu) samples of equal length");
        }
        if (s_.front() != 0.0 || mu_.front() != 0.0) {
            throw ValidationError("tabulated growth: first sample must be (0, 0)");
        }
        double prev_slope = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < s_.size(); ++i) {
            if (!(s_[i] > s_[i - 1]) || !(mu_[i] > mu_[i - 1])) {
                throw ValidationError("tabulated growth: samples must be strictly increasing");
            }
            const double slope = (mu_[i] - mu_[i - 1]) / (s_[i] - s_[i - 1]);
            if (slope > prev_slope * (1.0 + 1e-12)) {
                throw ValidationError("tabulated growth: samples are not concave");
            }
            prev_slope = slope;
        }
    }

    [[nodiscard]] double s_max() const { return s_.back(); }
    [[nodiscard]] double sup() const { return mu_.back(); }
    [[nodiscard]] const std::vector<double>& s() const { return s_; }
    [[nodiscard]] const std::vector<double>& mu() const { return mu_; }

    [[nodiscard]] double eval(double x) const {
        if (x > s_.back()) {
            throw DomainError("tabulated growth: s=" + std::to_string(x) + " beyond last sample");
        }
        auto it = std::upper_bound(s_.begin(), s_.end(), x);
        const auto i = static_cast<std::size_t>(std::distance(s_.begin(), it));
        if (i >= s_.size()) return mu_.back();
        const double t = (x - s_[i - 1]) / (s_[i] - s_[i - 1]);
        return mu_[i - 1] + t * (mu_[i] - mu_[i - 1]);
    }

private:
    std::vector<double> s_;
    std::vector<double> mu_;
};

/// An immutable growth law satisfying: mu(0)=0, increasing, concave.
class GrowthModel {
public:
    using Kind = std::variant<Monod, Tabulated>;

    static GrowthModel monod(double mu_max, double K) {
        if (!(mu_max > 0.0) || !(K > 0.0) || !std::isfinite(mu_max) || !std::isfinite(K)) {
            throw ValidationError("monod growth: mu_max and K must be positive and finite");
        }
        return GrowthModel(Monod{mu_max, K});
    }

    static GrowthModel tabulated(std::vector<double> s, std::vector<double> mu) {
        return GrowthModel(Tabulated(std::move(s), std::move(mu)));
    }

    [[nodiscard]] const Kind& kind() const { return kind_; }
    [[nodiscard]] const Monod* as_monod() const { return std::get_if<Monod>(&kind_); }
    [[nodiscard]] const Tabulated* as_tabulated() const { return std::get_if<Tabulated>(&kind_); }

    [[nodiscard]] std::optional<double> s_in_hint() const { return s_in_hint_; }
    GrowthModel& set_s_in_hint(double s_in) {
        s_in_hint_ = s_in;
        return *this;
    }

    /// Upper end of the domain (infinity for Monod).
    [[nodiscard]] double domain_max() const {
        if (const auto* tab = as_tabulated()) return tab->s_max();
        return std::numeric_limits<double>::infinity();
    }

    /// Least upper bound of mu.
    [[nodiscard]] double sup() const {
        if (const auto* m = as_monod()) return m->mu_max;
        return as_tabulated()->sup();
    }

private:
    explicit GrowthModel(Kind k) : kind_(std::move(k)) {}

    Kind kind_;
    std::optional<double> s_in_hint_;
};

namespace detail {

inline void require_nonnegative(double s, const char* what) {
    if (!(s >= 0.0)) {
        throw DomainError(std::string(what) + ": negative concentration s=" + std::to_string(s));
    }
}

}  // namespace detail

/// Specific growth rate mu(s).
inline double mu(const GrowthModel& model, double s) {
    detail::require_nonnegative(s, "mu");
    if (const auto* m = model.as_monod()) return m->mu_max * s / (m->K + s);
    return model.as_tabulated()->eval(s);
}

/// Analytic for Monod, central difference for tabulated laws.
inline double mu_prime(const GrowthModel& model, double s) {
    detail::require_nonnegative(s, "mu_prime");
    if (const auto* m = model.as_monod()) {
        const double den = m->K + s;
        return m->mu_max * m->K / (den * den);
    }
    const auto& tab = *model.as_tabulated();
    const double h = 1e-6 * std::max(1.0, s);
    const double lo = std::max(0.0, s - h);
    const double hi = std::min(tab.s_max(), s + h);
    return (tab.eval(hi) - tab.eval(lo)) / (hi - lo);
}

/// The unique s with mu(s) = rate; requires 0 < rate < sup mu.
inline double mu_inverse(const GrowthModel& model, double rate) {
    if (!(rate > 0.0) || !(rate < model.sup())) {
        throw NoPreimageError("mu_inverse: rate " + std::to_string(rate) + " outside (0, " +
                              std::to_string(model.sup()) + ")");
    }
    if (const auto* m = model.as_monod()) return m->K * rate / (m->mu_max - rate);
    const auto& tab = *model.as_tabulated();
    return roots::bisect([&](double s) { return tab.eval(s) - rate; }, 0.0, tab.s_max(),
                         {.abs_tol = 1e-12, .max_iter = 200});
}

/// beta(s) = mu(s) (s_in - s) on [0, s_in].
inline double beta(const GrowthModel& model, double s, double s_in) {
    if (!(s >= 0.0) || !(s <= s_in)) {
        throw DomainError("beta: s=" + std::to_string(s) + " outside [0, s_in]");
    }
    return mu(model, s) * (s_in - s);
}

inline double beta_prime(const GrowthModel& model, double s, double s_in) {
    if (!(s >= 0.0) || !(s <= s_in)) {
        throw DomainError("beta_prime: s=" + std::to_string(s) + " outside [0, s_in]");
    }
    return mu_prime(model, s) * (s_in - s) - mu(model, s);
}

/// Unique maximizer of beta on (0, s_in).
inline double s_hat(const GrowthModel& model, double s_in) {
    if (!(s_in > 0.0)) throw DomainError("s_hat: s_in must be positive");
    if (const auto* m = model.as_monod()) return std::sqrt(m->K * (m->K + s_in)) - m->K;
    if (s_in > model.domain_max()) {
        throw DomainError("s_hat: s_in beyond the tabulated growth domain");
    }
    return roots::golden_section_min([&](double s) { return -beta(model, s, s_in); }, 0.0, s_in,
                                     1e-12);
}

/// g(s) = 1 / beta(s); poles at 0 and s_in.
inline double g(const GrowthModel& model, double s, double s_in) {
    if (s == 0.0 || s == s_in) throw PoleError("g: pole at s=" + std::to_string(s));
    if (!(s > 0.0) || !(s < s_in)) {
        throw DomainError("g: s=" + std::to_string(s) + " outside (0, s_in)");
    }
    return 1.0 / beta(model, s, s_in);
}

/// g'(s) = -beta'(s) / beta(s)^2.
inline double g_prime(const GrowthModel& model, double s, double s_in) {
    const double b = 1.0 / g(model, s, s_in);
    return -beta_prime(model, s, s_in) / (b * b);
}

}  // namespace latchem
