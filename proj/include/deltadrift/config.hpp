#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "params.hpp"

namespace deltadrift {

struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

// One batch run: mode + physics + solver knobs + output routing.
struct RunConfig {
    std::string mode; // analytic | oracle | compare | sweep
    PhysicalParams params;
    int n = 1;
    double t_final = 0.0;
    int sample_count = 200;
    // solver fields
    int n_points = 4096;
    double pad = 8.0;
    double w_over_dx = 4.0;
    double dt_divisor = 200.0;
    std::optional<SweepAxis> sweep;
    // output
    std::string out;            // empty -> "<mode>.csv"
    std::string format = "csv"; // csv | json
    int jobs = 1;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "mode", "mu", "hbar", "u0_bar", "v2_offset", "a_bar", "r0", "v",
        "v0_override", "n", "t_final", "sample_count", "n_points", "pad",
        "w_over_dx", "dt_divisor", "sweep", "out", "format", "jobs"};
    return keys;
}

inline const std::set<std::string>& sweepable_params() {
    static const std::set<std::string> keys = {
        "mu", "hbar", "u0_bar", "v2_offset", "a_bar", "r0", "v",
        "v0_override", "n"};
    return keys;
}

inline double require_number(const nlohmann::json& doc, const std::string& key) {
    if (!doc.contains(key))
        throw ParseError("missing required key \"" + key + "\"");
    if (!doc.at(key).is_number())
        throw ParseError("key \"" + key + "\" must be a number");
    return doc.at(key).get<double>();
}

inline int require_integer(const nlohmann::json& doc, const std::string& key) {
    if (!doc.contains(key))
        throw ParseError("missing required key \"" + key + "\"");
    const auto& v = doc.at(key);
    if (!v.is_number_integer())
        throw ParseError("key \"" + key + "\" must be an integer");
    return v.get<int>();
}

} // namespace detail

// Build a validated RunConfig from a parsed JSON document. Unknown keys are
// rejected (typo safety); structural rules raise ValidationError.
inline RunConfig config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object())
        throw ParseError("config root must be a JSON object");
    for (const auto& item : doc.items()) {
        if (!detail::known_keys().count(item.key()))
            throw ParseError("unknown key \"" + item.key() + "\"");
    }

    RunConfig cfg;
    if (doc.contains("mode")) {
        if (!doc.at("mode").is_string())
            throw ParseError("key \"mode\" must be a string");
        cfg.mode = doc.at("mode").get<std::string>();
    }
    cfg.params.mu = detail::require_number(doc, "mu");
    cfg.params.hbar = detail::require_number(doc, "hbar");
    cfg.params.u0_bar = detail::require_number(doc, "u0_bar");
    cfg.params.v2_offset = detail::require_number(doc, "v2_offset");
    cfg.params.a_bar = detail::require_number(doc, "a_bar");
    cfg.params.r0 = detail::require_number(doc, "r0");
    cfg.params.v = detail::require_number(doc, "v");
    if (doc.contains("v0_override") && !doc.at("v0_override").is_null()) {
        if (!doc.at("v0_override").is_number())
            throw ParseError("key \"v0_override\" must be a number or null");
        cfg.params.v0_override = doc.at("v0_override").get<double>();
    }
    cfg.n = detail::require_integer(doc, "n");
    cfg.t_final = detail::require_number(doc, "t_final");

    if (doc.contains("sample_count"))
        cfg.sample_count = detail::require_integer(doc, "sample_count");
    if (doc.contains("n_points"))
        cfg.n_points = detail::require_integer(doc, "n_points");
    if (doc.contains("pad"))
        cfg.pad = detail::require_number(doc, "pad");
    if (doc.contains("w_over_dx"))
        cfg.w_over_dx = detail::require_number(doc, "w_over_dx");
    if (doc.contains("dt_divisor"))
        cfg.dt_divisor = detail::require_number(doc, "dt_divisor");
    if (doc.contains("jobs"))
        cfg.jobs = detail::require_integer(doc, "jobs");
    if (doc.contains("out")) {
        if (!doc.at("out").is_string())
            throw ParseError("key \"out\" must be a string");
        cfg.out = doc.at("out").get<std::string>();
    }
    if (doc.contains("format")) {
        if (!doc.at("format").is_string())
            throw ParseError("key \"format\" must be a string");
        cfg.format = doc.at("format").get<std::string>();
    }
    if (doc.contains("sweep")) {
        const auto& sw = doc.at("sweep");
        if (!sw.is_object())
            throw ParseError("key \"sweep\" must be an object {param, values}");
        for (const auto& item : sw.items()) {
            if (item.key() != "param" && item.key() != "values")
                throw ParseError("unknown key \"sweep." + item.key() + "\"");
        }
        SweepAxis axis;
        if (!sw.contains("param") || !sw.at("param").is_string())
            throw ParseError("key \"sweep.param\" must be a string");
        axis.param = sw.at("param").get<std::string>();
        if (!sw.contains("values") || !sw.at("values").is_array())
            throw ParseError("key \"sweep.values\" must be an array of numbers");
        for (const auto& v : sw.at("values")) {
            if (!v.is_number())
                throw ParseError("key \"sweep.values\" must hold numbers only");
            axis.values.push_back(v.get<double>());
        }
        cfg.sweep = std::move(axis);
    }

    // Structural invariants.
    if (cfg.mode != "analytic" && cfg.mode != "oracle" && cfg.mode != "compare" &&
        cfg.mode != "sweep")
        throw ValidationError("mode must be one of analytic|oracle|compare|sweep, got \"" +
                              cfg.mode + "\"");
    if (!(cfg.t_final > 0.0))
        throw ValidationError("t_final must be > 0");
    if (cfg.n < 1)
        throw ValidationError("n must be >= 1");
    if (cfg.sample_count < 2)
        throw ValidationError("sample_count must be >= 2");
    if (cfg.n_points < 2)
        throw ValidationError("n_points must be >= 2");
    if (!(cfg.pad > 1.0))
        throw ValidationError("pad must be > 1");
    if (!(cfg.w_over_dx >= 2.0))
        throw ValidationError("w_over_dx must be >= 2 (delta must span the grid)");
    if (!(cfg.dt_divisor >= 50.0))
        throw ValidationError("dt_divisor must be >= 50 (dt <= period/50)");
    if (cfg.jobs < 1)
        throw ValidationError("jobs must be >= 1");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ValidationError("format must be csv or json");
    if (cfg.mode == "sweep") {
        if (!cfg.sweep)
            throw ValidationError("sweep mode requires a sweep axis");
        if (cfg.sweep->values.empty())
            throw ValidationError("sweep.values must not be empty");
        if (!detail::sweepable_params().count(cfg.sweep->param))
            throw ValidationError("sweep.param \"" + cfg.sweep->param +
                                  "\" is not a sweepable parameter");
    } else if (cfg.sweep) {
        throw ValidationError("sweep axis given but mode is not sweep");
    }
    return cfg;
}

// Parse raw JSON text. Syntax errors surface as ParseError with the
// underlying position message.
inline nlohmann::json parse_document(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

inline RunConfig parse_config(const std::string& text) {
    return config_from_json(parse_document(text));
}

// Apply one --set key=value override onto the raw document (flags win over
// the file). The value is parsed as JSON when possible, else kept as string.
inline void apply_override(nlohmann::json& doc, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ParseError("--set expects key=value, got \"" + kv + "\"");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded())
        value = raw; // plain string
    doc[key] = value;
}

} // namespace deltadrift
