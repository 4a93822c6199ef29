#pragma once

// Config ingestion: a human-editable JSON document describing the scenario,
// an optional sweep with named overlays, the Monte Carlo settings, and the
// truncation policy.  dB is the canonical SNR unit at this surface; values
// are converted to linear on parse.

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mftr/monte_carlo.hpp"
#include "mftr/secrecy_metrics.hpp"

namespace mftr {

using json = nlohmann::json;

enum class SweepVariable { gamma_b_db, gamma_e_db, rs, theta };

inline const char* sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::gamma_b_db: return "gamma_b_db";
        case SweepVariable::gamma_e_db: return "gamma_e_db";
        case SweepVariable::rs: return "rs";
        case SweepVariable::theta: return "theta";
    }
    return "?";
}

struct Overlay {
    std::string name;
    std::map<std::string, double> overrides;  // e.g. {"bob.L": 2}
};

struct SweepSpec {
    SweepVariable variable = SweepVariable::gamma_b_db;
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;
    std::vector<Overlay> overlays;  // at least one; "base" if unspecified

    std::vector<double> grid() const {
        std::vector<double> xs;
        for (double x = start; x <= stop + 1e-12 * std::max(1.0, std::abs(stop)); x += step)
            xs.push_back(x);
        return xs;
    }
};

struct TruncationSetting {
    enum class Mode { fixed, automatic };
    Mode mode = Mode::fixed;
    int T = 50;            // fixed mode
    double target = 1e-6;  // automatic mode: abs floor on the refinement delta
    int T_max = 1600;
};

struct RunConfig {
    SecrecyScenario scenario;
    std::optional<SweepSpec> sweep;
    SamplerConfig sampler;
    bool mc_enabled = false;
    TruncationSetting trunc;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& why) {
    throw std::invalid_argument(path + ": " + why);
}

inline double want_number(const json& j, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    return j.get<double>();
}

inline int want_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) config_error(path, "expected an integer");
    return j.get<int>();
}

inline LinkConfig parse_link(const json& j, const std::string& path) {
    if (!j.is_object()) config_error(path, "expected an object");
    LinkConfig link;
    for (auto& [key, value] : j.items()) {
        const std::string p = path + "." + key;
        if (key == "m") link.params.m = want_number(value, p);
        else if (key == "mu") link.params.mu = want_int(value, p);
        else if (key == "sigma2") link.params.sigma2 = want_number(value, p);
        else if (key == "K") link.params.K = want_number(value, p);
        else if (key == "delta") link.params.delta = want_number(value, p);
        else if (key == "L") link.L = want_int(value, p);
        else if (key == "gamma_bar_db") link.gamma_bar = db_to_linear(want_number(value, p));
        else config_error(p, "unknown field");
    }
    for (const char* req : {"m", "mu", "sigma2", "K", "delta", "L", "gamma_bar_db"})
        if (!j.contains(req)) config_error(path + "." + req, "missing required field");
    try {
        link.validate();
    } catch (const std::invalid_argument& e) {
        config_error(path, e.what());
    }
    return link;
}

inline void apply_override(SecrecyScenario& sc, const std::string& key, double value,
                           const std::string& path) {
    auto as_int = [&](double v) {
        const int n = static_cast<int>(std::llround(v));
        if (std::abs(v - n) > 1e-9) config_error(path, "expected an integer value");
        return n;
    };
    LinkConfig* link = nullptr;
    std::string field = key;
    if (key.rfind("bob.", 0) == 0) { link = &sc.bob; field = key.substr(4); }
    else if (key.rfind("eve.", 0) == 0) { link = &sc.eve; field = key.substr(4); }
    if (link) {
        if (field == "m") link->params.m = value;
        else if (field == "mu") link->params.mu = as_int(value);
        else if (field == "sigma2") link->params.sigma2 = value;
        else if (field == "K") link->params.K = value;
        else if (field == "delta") link->params.delta = value;
        else if (field == "L") link->L = as_int(value);
        else if (field == "gamma_bar_db") link->gamma_bar = db_to_linear(value);
        else config_error(path, "unknown override field '" + key + "'");
        return;
    }
    if (key == "rs") sc.rs = value;
    else if (key == "theta") sc.theta = value;
    else config_error(path, "unknown override field '" + key + "'");
}

}  // namespace detail

inline SecrecyScenario scenario_with_overrides(SecrecyScenario sc, const Overlay& overlay) {
    for (const auto& [key, value] : overlay.overrides)
        detail::apply_override(sc, key, value, "overlays." + overlay.name + "." + key);
    sc.validate();
    return sc;
}

inline RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) detail::config_error("config", "expected a JSON object");

    RunConfig cfg;
    if (!j.contains("bob")) detail::config_error("bob", "missing required field");
    if (!j.contains("eve")) detail::config_error("eve", "missing required field");
    cfg.scenario.bob = detail::parse_link(j["bob"], "bob");
    cfg.scenario.eve = detail::parse_link(j["eve"], "eve");
    cfg.scenario.rs = j.contains("rs") ? detail::want_number(j["rs"], "rs") : 1.0;
    cfg.scenario.theta = j.contains("theta") ? detail::want_number(j["theta"], "theta") : 1.0;
    try {
        cfg.scenario.validate();
    } catch (const std::invalid_argument& e) {
        detail::config_error("scenario", e.what());
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        if (!s.is_object()) detail::config_error("sweep", "expected an object");
        SweepSpec spec;
        const std::string var = s.value("variable", "gamma_b_db");
        if (var == "gamma_b_db") spec.variable = SweepVariable::gamma_b_db;
        else if (var == "gamma_e_db") spec.variable = SweepVariable::gamma_e_db;
        else if (var == "rs") spec.variable = SweepVariable::rs;
        else if (var == "theta") spec.variable = SweepVariable::theta;
        else detail::config_error("sweep.variable", "must be one of gamma_b_db|gamma_e_db|rs|theta");
        if (!s.contains("start") || !s.contains("stop"))
            detail::config_error("sweep", "start and stop are required");
        spec.start = detail::want_number(s["start"], "sweep.start");
        spec.stop = detail::want_number(s["stop"], "sweep.stop");
        spec.step = s.contains("step") ? detail::want_number(s["step"], "sweep.step") : 1.0;
        if (!(spec.step > 0.0)) detail::config_error("sweep.step", "must be > 0");
        if (spec.start > spec.stop) detail::config_error("sweep", "start must be <= stop");
        if (s.contains("overlays")) {
            if (!s["overlays"].is_array()) detail::config_error("sweep.overlays", "expected an array");
            for (const json& o : s["overlays"]) {
                Overlay ov;
                if (!o.is_object() || !o.contains("name"))
                    detail::config_error("sweep.overlays", "each overlay needs a name");
                ov.name = o["name"].get<std::string>();
                if (o.contains("set"))
                    for (auto& [k, v] : o["set"].items())
                        ov.overrides[k] = detail::want_number(v, "sweep.overlays." + ov.name + "." + k);
                for (const auto& existing : spec.overlays)
                    if (existing.name == ov.name)
                        detail::config_error("sweep.overlays", "duplicate overlay name '" + ov.name + "'");
                spec.overlays.push_back(std::move(ov));
            }
        }
        if (spec.overlays.empty()) spec.overlays.push_back({"base", {}});
        // overlays must produce valid scenarios
        for (const auto& ov : spec.overlays) scenario_with_overrides(cfg.scenario, ov);
        cfg.sweep = std::move(spec);
    }

    if (j.contains("mc")) {
        const json& m = j["mc"];
        if (!m.is_object()) detail::config_error("mc", "expected an object");
        cfg.mc_enabled = m.value("enabled", true);
        if (m.contains("strategy")) {
            const std::string s = m["strategy"].get<std::string>();
            if (s == "physical_rays") cfg.sampler.strategy = SamplerStrategy::physical_rays;
            else if (s == "conditional_chi2") cfg.sampler.strategy = SamplerStrategy::conditional_chi2;
            else detail::config_error("mc.strategy", "must be physical_rays|conditional_chi2");
        }
        if (m.contains("samples")) cfg.sampler.samples = m["samples"].get<std::int64_t>();
        if (m.contains("seed")) cfg.sampler.seed = m["seed"].get<std::uint64_t>();
        if (m.contains("batch")) cfg.sampler.batch = m["batch"].get<std::int64_t>();
        try {
            cfg.sampler.validate();
        } catch (const std::invalid_argument& e) {
            detail::config_error("mc", e.what());
        }
    }

    if (j.contains("trunc")) {
        const json& t = j["trunc"];
        if (!t.is_object()) detail::config_error("trunc", "expected an object");
        const std::string mode = t.value("mode", "fixed");
        if (mode == "fixed") cfg.trunc.mode = TruncationSetting::Mode::fixed;
        else if (mode == "auto") cfg.trunc.mode = TruncationSetting::Mode::automatic;
        else detail::config_error("trunc.mode", "must be fixed|auto");
        if (t.contains("T")) cfg.trunc.T = detail::want_int(t["T"], "trunc.T");
        if (t.contains("target")) cfg.trunc.target = detail::want_number(t["target"], "trunc.target");
        if (t.contains("T_max")) cfg.trunc.T_max = detail::want_int(t["T_max"], "trunc.T_max");
        if (cfg.trunc.T < 1) detail::config_error("trunc.T", "must be >= 1");
        if (!(cfg.trunc.target > 0.0)) detail::config_error("trunc.target", "must be > 0");
    }
    return cfg;
}

// Canonical JSON form; parse(emit(cfg)) reproduces the objects.
inline json link_to_json(const LinkConfig& link) {
    return json{{"m", link.params.m},         {"mu", link.params.mu},
                {"sigma2", link.params.sigma2}, {"K", link.params.K},
                {"delta", link.params.delta},   {"L", link.L},
                {"gamma_bar_db", linear_to_db(link.gamma_bar)}};
}

inline json config_to_json(const RunConfig& cfg) {
    json j{{"bob", link_to_json(cfg.scenario.bob)},
           {"eve", link_to_json(cfg.scenario.eve)},
           {"rs", cfg.scenario.rs},
           {"theta", cfg.scenario.theta}};
    if (cfg.sweep) {
        json overlays = json::array();
        for (const auto& ov : cfg.sweep->overlays) {
            json set = json::object();
            for (const auto& [k, v] : ov.overrides) set[k] = v;
            overlays.push_back(json{{"name", ov.name}, {"set", set}});
        }
        j["sweep"] = json{{"variable", sweep_variable_name(cfg.sweep->variable)},
                          {"start", cfg.sweep->start},
                          {"stop", cfg.sweep->stop},
                          {"step", cfg.sweep->step},
                          {"overlays", overlays}};
    }
    j["mc"] = json{{"enabled", cfg.mc_enabled},
                   {"strategy", cfg.sampler.strategy == SamplerStrategy::physical_rays
                                    ? "physical_rays"
                                    : "conditional_chi2"},
                   {"samples", cfg.sampler.samples},
                   {"seed", cfg.sampler.seed},
                   {"batch", cfg.sampler.batch}};
    j["trunc"] = json{{"mode", cfg.trunc.mode == TruncationSetting::Mode::fixed ? "fixed" : "auto"},
                      {"T", cfg.trunc.T},
                      {"target", cfg.trunc.target},
                      {"T_max", cfg.trunc.T_max}};
    return j;
}

inline std::string emit_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2); }

// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline void set_sweep_variable(SecrecyScenario& sc, SweepVariable v, double x) {
    switch (v) {
        case SweepVariable::gamma_b_db: sc.bob.gamma_bar = db_to_linear(x); break;
        case SweepVariable::gamma_e_db: sc.eve.gamma_bar = db_to_linear(x); break;
        case SweepVariable::rs: sc.rs = x; break;
        case SweepVariable::theta: sc.theta = x; break;
    }
}

}  // namespace mftr
