#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: JSON schema, validation and typed parsing.
 *
 * The schema below is also published as schemas/config.schema.json. The
 * validator implements the subset of JSON Schema it uses: type, enum,
 * required, properties, additionalProperties (false), minimum, maximum,
 * exclusiveMinimum, exclusiveMaximum, items and minItems.
 */

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dynamics.hpp"
#include "errors.hpp"
#include "growth.hpp"

namespace latchem::config {

using nlohmann::json;

inline constexpr std::string_view kSchemaText = R"SCHEMA({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "lateral chemostat run configuration",
  "type": "object",
  "required": ["growth", "chemostat"],
  "additionalProperties": false,
  "properties": {
    "growth": {
      "type": "object",
      "required": ["kind"],
      "additionalProperties": false,
      "properties": {
        "kind": {"type": "string", "enum": ["monod", "tabulated"]},
        "mu_max": {"type": "number", "exclusiveMinimum": 0},
        "K": {"type": "number", "exclusiveMinimum": 0},
        "s": {"type": "array", "minItems": 2, "items": {"type": "number", "minimum": 0}},
        "mu": {"type": "array", "minItems": 2, "items": {"type": "number", "minimum": 0}}
      }
    },
    "chemostat": {
      "type": "object",
      "required": ["V1", "V2", "Q", "s_in"],
      "additionalProperties": false,
      "properties": {
        "V1": {"type": "number", "minimum": 0},
        "V2": {"type": "number", "minimum": 0},
        "Q": {"type": "number", "exclusiveMinimum": 0},
        "s_in": {"type": "number", "exclusiveMinimum": 0},
        "d": {"type": "number", "minimum": 0}
      }
    },
    "simulate": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "initial": {
          "type": "object",
          "required": ["s1", "x1", "s2", "x2"],
          "additionalProperties": false,
          "properties": {
            "s1": {"type": "number", "minimum": 0},
            "x1": {"type": "number", "minimum": 0},
            "s2": {"type": "number", "minimum": 0},
            "x2": {"type": "number", "minimum": 0}
          }
        },
        "random_initial": {"type": "boolean"},
        "rtol": {"type": "number", "exclusiveMinimum": 0},
        "atol": {"type": "number", "exclusiveMinimum": 0},
        "stop_at_steady_state": {"type": "boolean"},
        "record_every": {"type": "integer", "minimum": 1}
      }
    },
    "sweep": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "points": {"type": "integer", "minimum": 1},
        "d_min": {"type": "number", "minimum": 0},
        "d_max": {"type": "number", "exclusiveMinimum": 0},
        "stop_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
      }
    },
    "design": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "s_ref": {"type": "number", "exclusiveMinimum": 0},
        "d": {"type": "number", "minimum": 0},
        "curve": {
          "type": "object",
          "additionalProperties": false,
          "properties": {
            "points": {"type": "integer", "minimum": 2},
            "d_min": {"type": "number", "exclusiveMinimum": 0},
            "d_max": {"type": "number", "exclusiveMinimum": 0}
          }
        }
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "dir": {"type": "string"}
      }
    },
    "seed": {"type": "integer", "minimum": 0},
    "jobs": {"type": "integer", "minimum": 1}
  }
}
)SCHEMA";

inline const json& schema() {
    static const json parsed = json::parse(kSchemaText);
    return parsed;
}

namespace detail {

inline std::string pointer_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

inline bool type_matches(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_boolean();
    if (type == "integer") return v.is_number_integer();
    if (type == "number") return v.is_number();
    if (type == "null") return v.is_null();
    return false;
}

inline std::string where(const std::string& path) { return path.empty() ? "/" : path; }

inline void validate_node(const json& v, const json& s, const std::string& path, std::vector<std::string>& errors) {
    if (auto it = s.find("type"); it != s.end() && !type_matches(v, it->get<std::string>())) {
        errors.push_back(where(path) + ": expected " + it->get<std::string>());
        return;
    }
    if (auto it = s.find("enum"); it != s.end()) {
        bool found = false;
        for (const auto& e : *it) found = found || e == v;
        if (!found) errors.push_back(where(path) + ": value " + v.dump() + " not in " + it->dump());
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (auto it = s.find("minimum"); it != s.end() && !(x >= it->get<double>()))
            errors.push_back(where(path) + ": must be >= " + it->dump());
        if (auto it = s.find("maximum"); it != s.end() && !(x <= it->get<double>()))
            errors.push_back(where(path) + ": must be <= " + it->dump());
        if (auto it = s.find("exclusiveMinimum"); it != s.end() && !(x > it->get<double>()))
            errors.push_back(where(path) + ": must be > " + it->dump());
        if (auto it = s.find("exclusiveMaximum"); it != s.end() && !(x < it->get<double>()))
            errors.push_back(where(path) + ": must be < " + it->dump());
    }
    if (v.is_object()) {
        if (auto it = s.find("required"); it != s.end()) {
            for (const auto& key : *it) {
                if (!v.contains(key.get<std::string>()))
                    errors.push_back(where(path) + ": missing required property '" + key.get<std::string>() + "'");
            }
        }
        const auto props = s.find("properties");
        const bool closed = s.value("additionalProperties", true) == false;
        for (const auto& [key, child] : v.items()) {
            const std::string child_path = path + "/" + pointer_token(key);
            if (props != s.end() && props->contains(key)) {
                validate_node(child, (*props)[key], child_path, errors);
            } else if (closed) {
                errors.push_back(child_path + ": unknown property");
            }
        }
    }
    if (v.is_array()) {
        if (auto it = s.find("minItems"); it != s.end() && v.size() < it->get<std::size_t>())
            errors.push_back(where(path) + ": needs at least " + it->dump() + " items");
        if (auto it = s.find("items"); it != s.end()) {
            for (std::size_t i = 0; i < v.size(); ++i) validate_node(v[i], *it, path + "/" + std::to_string(i), errors);
        }
    }
}

}  // namespace detail

/// Schema violations as "json-pointer: message" strings; empty when valid.
inline std::vector<std::string> schema_errors(const json& instance, const json& schema_doc = schema()) {
    std::vector<std::string> errors;
    detail::validate_node(instance, schema_doc, "", errors);
    return errors;
}

struct SimulateSection {
    /// Default 1000 V / Q.
    std::optional<double> horizon;
    std::optional<State> initial;
    bool random_initial = false;
    double rtol = 1e-8;
    double atol = 1e-10;
    bool stop_at_steady_state = false;
    std::size_t record_every = 1;
};

struct SweepSection {
    std::size_t points = 200;
    std::optional<double> d_min;
    std::optional<double> d_max;
    double stop_fraction = 0.999;
};

struct CurveSection {
    std::size_t points = 200;
    std::optional<double> d_min;
    std::optional<double> d_max;
};

struct DesignSection {
    std::optional<double> s_ref;
    /// Fixed diffusion rate; absent selects the free-d design.
    std::optional<double> d;
    CurveSection curve;
};

struct RunConfig {
    ChemostatConfig chemostat;
    /// chemostat.d was given; cfg.chemostat.d is 0 otherwise.
    bool has_d = false;
    SimulateSection simulate;
    SweepSection sweep;
    DesignSection design;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

inline GrowthModel parse_growth(const json& g) {
    const auto kind = g.at("kind").get<std::string>();
    if (kind == "monod") {
        if (!g.contains("mu_max") || !g.contains("K"))
            throw ValidationError("/growth: monod requires 'mu_max' and 'K'");
        if (g.contains("s") || g.contains("mu")) throw ValidationError("/growth: monod takes no samples");
        return GrowthModel::monod(g["mu_max"].get<double>(), g["K"].get<double>());
    }
    if (!g.contains("s") || !g.contains("mu"))
        throw ValidationError("/growth: tabulated requires 's' and 'mu'");
    if (g.contains("mu_max") || g.contains("K")) throw ValidationError("/growth: tabulated takes no Monod parameters");
    try {
        return GrowthModel::tabulated(g["s"].get<std::vector<double>>(), g["mu"].get<std::vector<double>>());
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("/growth: ") + e.what());
    }
}

/// Schema check followed by semantic checks; throws ValidationError listing every violation.
inline RunConfig parse_run_config(const json& doc) {
    if (const auto errs = schema_errors(doc); !errs.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errs) msg += "\n  " + e;
        throw ValidationError(msg);
    }
    RunConfig rc;
    const auto& c = doc.at("chemostat");
    rc.chemostat.V1 = c.at("V1").get<double>();
    rc.chemostat.V2 = c.at("V2").get<double>();
    rc.chemostat.Q = c.at("Q").get<double>();
    rc.chemostat.s_in = c.at("s_in").get<double>();
    rc.has_d = c.contains("d");
    rc.chemostat.d = rc.has_d ? c["d"].get<double>() : 0.0;
    rc.chemostat.growth = parse_growth(doc.at("growth"));
    rc.chemostat.growth.set_s_in_hint(rc.chemostat.s_in);
    try {
        (rc.has_d ? rc.chemostat : rc.chemostat.with_d(rc.chemostat.Q)).validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("/chemostat: ") + e.what());
    }

    if (doc.contains("simulate")) {
        const auto& s = doc["simulate"];
        if (s.contains("horizon")) rc.simulate.horizon = s["horizon"].get<double>();
        if (s.contains("initial")) {
            const auto& i = s["initial"];
            rc.simulate.initial = State{i["s1"].get<double>(), i["x1"].get<double>(), i["s2"].get<double>(),
                                        i["x2"].get<double>()};
        }
        rc.simulate.random_initial = s.value("random_initial", false);
        rc.simulate.rtol = s.value("rtol", rc.simulate.rtol);
        rc.simulate.atol = s.value("atol", rc.simulate.atol);
        rc.simulate.stop_at_steady_state = s.value("stop_at_steady_state", false);
        rc.simulate.record_every = s.value("record_every", std::size_t{1});
        if (rc.simulate.initial && rc.simulate.random_initial)
            throw ValidationError("/simulate: 'initial' and 'random_initial' are exclusive");
    }
    if (doc.contains("sweep")) {
        const auto& s = doc["sweep"];
        rc.sweep.points = s.value("points", rc.sweep.points);
        if (s.contains("d_min")) rc.sweep.d_min = s["d_min"].get<double>();
        if (s.contains("d_max")) rc.sweep.d_max = s["d_max"].get<double>();
        rc.sweep.stop_fraction = s.value("stop_fraction", rc.sweep.stop_fraction);
        if (rc.sweep.d_min.has_value() != rc.sweep.d_max.has_value())
            throw ValidationError("/sweep: give both 'd_min' and 'd_max' or neither");
        if (rc.sweep.d_min && !(*rc.sweep.d_min < *rc.sweep.d_max))
            throw ValidationError("/sweep: 'd_min' must be below 'd_max'");
    }
    if (doc.contains("design")) {
        const auto& s = doc["design"];
        if (s.contains("s_ref")) rc.design.s_ref = s["s_ref"].get<double>();
        if (s.contains("d")) rc.design.d = s["d"].get<double>();
        if (rc.design.s_ref && !(*rc.design.s_ref < rc.chemostat.s_in))
            throw ValidationError("/design/s_ref: must be below s_in");
        if (s.contains("curve")) {
            const auto& cv = s["curve"];
            rc.design.curve.points = cv.value("points", rc.design.curve.points);
            if (cv.contains("d_min")) rc.design.curve.d_min = cv["d_min"].get<double>();
            if (cv.contains("d_max")) rc.design.curve.d_max = cv["d_max"].get<double>();
            if (rc.design.curve.d_min && rc.design.curve.d_max && !(*rc.design.curve.d_min < *rc.design.curve.d_max))
                throw ValidationError("/design/curve: 'd_min' must be below 'd_max'");
        }
    }
    if (doc.contains("output")) rc.output_dir = doc["output"].value("dir", rc.output_dir);
    rc.seed = doc.value("seed", std::uint64_t{0});
    rc.jobs = doc.value("jobs", 1u);
    return rc;
}

/// Reads and parses a JSON document; malformed text is a ValidationError.
inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in '" + path + "': " + e.what());
    }
}

}  // namespace latchem::config
