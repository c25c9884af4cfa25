#pragma once

/**
 * @file io.hpp
 * @brief JSON reports and CSV tables for the analysis results.
 *
 * CSV follows RFC 4180 with a header row; numbers are written with 17
 * significant digits so that they round-trip exactly. Undefined values are
 * empty fields.
 */

#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "design.hpp"
#include "dmap.hpp"
#include "dynamics.hpp"
#include "equilibria.hpp"

namespace latchem::io {

using nlohmann::json;

/// Shortest text that is exact to 17 significant digits; empty for NaN.
inline std::string format_double(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json to_json(const State& y) {
    return {{"s1", y.s1}, {"x1", y.x1}, {"s2", y.s2}, {"x2", y.x2}};
}

inline json to_json(const std::vector<std::complex<double>>& ev) {
    json arr = json::array();
    for (const auto& e : ev) arr.push_back({{"re", e.real()}, {"im", e.imag()}});
    return arr;
}

/// {kind, s1, x1, s2, x2, eigenvalues: [{re, im}], stability}
inline json to_json(const Equilibrium& eq) {
    return {{"kind", to_string(eq.kind)},
            {"s1", eq.state.s1},
            {"x1", eq.state.x1},
            {"s2", eq.state.s2},
            {"x2", eq.state.x2},
            {"eigenvalues", to_json(eq.eigenvalues)},
            {"stability", to_string(eq.stability)}};
}

inline json to_json(const ChemostatConfig& c, const EquilibriumReport& rep) {
    json eqs = json::array();
    eqs.push_back(to_json(rep.washout));
    if (rep.positive) eqs.push_back(to_json(*rep.positive));
    return {{"topology", to_string(topology(c))},
            {"washout_unique", rep.washout_unique},
            {"attractor", to_string(rep.attractor().kind)},
            {"equilibria", eqs}};
}

/// {kind, V1, V2, d, d_any, s2_opt, total_volume, baseline_volume, residence_time, alpha, s_G}
inline json to_json(const DesignResult& r) {
    return {{"kind", to_string(r.kind)},
            {"V1", r.V1},
            {"V2", r.V2},
            {"d", r.d},
            {"d_any", r.d_any},
            {"s2_opt", r.s2_opt},
            {"total_volume", r.total_volume},
            {"baseline_volume", r.baseline_volume},
            {"residence_time", r.residence_time},
            {"alpha", optional_number(r.alpha)},
            {"s_G", optional_number(r.s_G)}};
}

/// Sidecar of a sweep: {case, d_bar, d_star, s1_star_0, s1_star_inf, ...}
inline json to_json(const DiffusionProfile& p) {
    json flagged = json::array();
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
        if (!p.samples[i].valid) flagged.push_back({{"index", i}, {"d", p.samples[i].d}, {"reason", p.samples[i].note}});
    }
    return {{"case", to_string(p.diffusion_case)},
            {"d_bar", optional_number(p.d_bar)},
            {"d_star", optional_number(p.d_star.d_star)},
            {"d_star_kind", p.d_star.kind == DStarKind::Interior ? "interior_minimum" : "decreasing"},
            {"s1_star_0", optional_number(p.s1_star_0)},
            {"s1_star_inf", optional_number(p.s1_star_inf)},
            {"s_hat", p.s_hat},
            {"samples", p.samples.size()},
            {"flagged", flagged}};
}

inline void write_csv_row(std::ostream& os, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) os << ',';
        os << f;
        first = false;
    }
    os << "\r\n";
}

/// t,s1,x1,s2,x2
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    write_csv_row(os, {"t", "s1", "x1", "s2", "x2"});
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& y = tr.states[i];
        write_csv_row(os, {format_double(tr.times[i]), format_double(y.s1), format_double(y.x1),
                           format_double(y.s2), format_double(y.x2)});
    }
}

/// d,s1_star,s2_star,ds1_dd
inline void write_sweep_csv(std::ostream& os, const DiffusionProfile& p) {
    write_csv_row(os, {"d", "s1_star", "s2_star", "ds1_dd"});
    for (const auto& s : p.samples) {
        write_csv_row(os, {format_double(s.d), format_double(s.s1_star), format_double(s.s2_star),
                           format_double(s.ds1_dd)});
    }
}

/// d,V_opt,kind
inline void write_volume_curve_csv(std::ostream& os, const std::vector<VolumeSample>& curve) {
    write_csv_row(os, {"d", "V_opt", "kind"});
    for (const auto& s : curve) {
        write_csv_row(os, {format_double(s.d), format_double(s.total_volume),
                           s.valid ? to_string(s.kind) : ""});
    }
}

/// Parses a numeric CSV field; empty means NaN.
inline double parse_double(const std::string& field) {
    if (field.empty()) return std::nan("");
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw std::invalid_argument("not a number: '" + field + "'");
    }
    return v;
}

/// Splits one unquoted CSV record (the tables above never quote).
inline std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace latchem::io
