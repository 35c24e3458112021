// config.hpp
//
// Experiment configuration files: a single JSON object with flat keys plus
// one array for the policy roster. Unknown keys are rejected so typos fail
// loudly instead of silently running defaults.
#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "probelab/harness.hpp"

namespace probelab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) config_fail(where, "unknown key '" + it.key() + "'");
    }
}

inline const json& require_key(const json& obj, const std::string& where, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) config_fail(where, std::string("missing key '") + key + "'");
    return *it;
}

inline double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) config_fail(where, "expected a number");
    return v.get<double>();
}

inline std::int64_t as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) config_fail(where, "expected an integer");
    return v.get<std::int64_t>();
}

inline std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) config_fail(where, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> as_number_array(const json& v, const std::string& where) {
    if (!v.is_array()) config_fail(where, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_number(e, where));
    return out;
}

inline ObservationModel parse_model(const json& m) {
    if (!m.is_object()) config_fail("model", "expected an object");
    const std::string family = as_string(require_key(m, "model", "family"), "model.family");
    if (family == "poisson") {
        reject_unknown_keys(m, "model", {"family", "lambda_f", "lambda_g"});
        const double lf = as_number(require_key(m, "model", "lambda_f"), "model.lambda_f");
        const double lg = as_number(require_key(m, "model", "lambda_g"), "model.lambda_g");
        try {
            return ObservationModel::poisson(lf, lg);
        } catch (const std::invalid_argument& e) {
            config_fail("model", e.what());
        }
    }
    if (family == "finite_discrete") {
        reject_unknown_keys(m, "model", {"family", "pmf_f", "pmf_g"});
        auto pf = as_number_array(require_key(m, "model", "pmf_f"), "model.pmf_f");
        auto pg = as_number_array(require_key(m, "model", "pmf_g"), "model.pmf_g");
        try {
            return ObservationModel::finite_discrete(std::move(pf), std::move(pg));
        } catch (const std::invalid_argument& e) {
            config_fail("model", e.what());
        }
    }
    config_fail("model.family", "expected 'poisson' or 'finite_discrete', got '" + family + "'");
}

inline PolicyKind parse_policy(const json& p, const std::string& where) {
    std::string name;
    double sluggish_p = 0.1;
    bool has_p = false;
    if (p.is_string()) {
        name = p.get<std::string>();
    } else if (p.is_object()) {
        reject_unknown_keys(p, where, {"name", "p"});
        name = as_string(require_key(p, where, "name"), where + ".name");
        if (p.contains("p")) {
            sluggish_p = as_number(p["p"], where + ".p");
            has_p = true;
        }
    } else {
        config_fail(where, "expected a policy name or {name, p} object");
    }
    if (has_p && name != "sluggish")
        config_fail(where, "'p' is only valid for the sluggish policy");
    try {
        if (name == "dbs") return PolicyKind::dbs();
        if (name == "chernoff") return PolicyKind::chernoff();
        if (name == "dgf") return PolicyKind::dgf();
        if (name == "sluggish") return PolicyKind::sluggish(sluggish_p);
    } catch (const std::invalid_argument& e) {
        config_fail(where, e.what());
    }
    config_fail(where, "unknown policy '" + name + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
    using detail::config_fail;
    if (!j.is_object()) config_fail("<root>", "expected a JSON object");
    detail::reject_unknown_keys(j, "<root>",
                                {"m_cells", "model", "theta_grid", "s_ratio", "policies",
                                 "trials_per_hypothesis", "priors", "master_seed",
                                 "max_steps_factor"});

    ExperimentConfig config{
        .m_cells = static_cast<int>(detail::as_integer(
            detail::require_key(j, "<root>", "m_cells"), "m_cells")),
        .model = detail::parse_model(detail::require_key(j, "<root>", "model")),
        .theta_grid = detail::as_number_array(detail::require_key(j, "<root>", "theta_grid"),
                                              "theta_grid"),
        .s_ratio = detail::as_number(detail::require_key(j, "<root>", "s_ratio"), "s_ratio"),
        .policies = {},
        .trials_per_hypothesis = 1,
        .priors = {},
        .master_seed = 0,
        .max_steps_factor = 20.0,
    };

    const auto& pol = detail::require_key(j, "<root>", "policies");
    if (!pol.is_array()) config_fail("policies", "expected an array");
    for (std::size_t i = 0; i < pol.size(); ++i)
        config.policies.push_back(detail::parse_policy(pol[i], "policies[" + std::to_string(i) + "]"));

    config.trials_per_hypothesis =
        detail::as_integer(detail::require_key(j, "<root>", "trials_per_hypothesis"),
                           "trials_per_hypothesis");

    const auto& seed = detail::require_key(j, "<root>", "master_seed");
    if (!seed.is_number_integer()) config_fail("master_seed", "expected an integer");
    config.master_seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>()
                                                   : static_cast<std::uint64_t>(seed.get<std::int64_t>());

    if (j.contains("priors")) config.priors = detail::as_number_array(j["priors"], "priors");
    if (j.contains("max_steps_factor"))
        config.max_steps_factor = detail::as_number(j["max_steps_factor"], "max_steps_factor");

    try {
        validate_config(config);
    } catch (const std::invalid_argument& e) {
        config_fail("<root>", e.what());
    }
    return config;
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config error in " + source + ": " + e.what());
    }
    return parse_config_json(j);
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace probelab
