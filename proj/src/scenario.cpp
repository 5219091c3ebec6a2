// SPDX-License-Identifier: Apache-2.0
#include "insopt/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

namespace insopt {

namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown(const ordered_json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown key \"" + it.key() + "\" in " + path);
        }
    }
}

double get_number(const ordered_json& obj, const std::string& path, const char* key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing key \"" + std::string(key) + "\" in " + path);
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError("key \"" + std::string(key) + "\" in " + path +
                          " must be a number");
    }
    return v.get<double>();
}

int get_int(const ordered_json& obj, const std::string& path, const char* key,
            int fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError("key \"" + std::string(key) + "\" in " + path +
                          " must be an integer");
    }
    return v.get<int>();
}

std::string get_string(const ordered_json& obj, const std::string& path,
                       const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError("key \"" + std::string(key) + "\" in " + path +
                          " must be a string");
    }
    return v.get<std::string>();
}

std::vector<double> get_number_array(const ordered_json& obj, const std::string& path,
                                     const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_array()) {
        throw ConfigError("key \"" + std::string(key) + "\" in " + path +
                          " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : obj.at(key)) {
        if (!v.is_number()) {
            throw ConfigError("entries of \"" + std::string(key) + "\" in " + path +
                              " must be numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

DistributionSpec parse_distribution(const ordered_json& obj) {
    const std::string path = "distribution";
    DistributionSpec spec;
    spec.family = get_string(obj, path, "family", "");
    if (spec.family == "exponential") {
        reject_unknown(obj, path, {"family", "lambda"});
        spec.lambda = get_number(obj, path, "lambda");
    } else if (spec.family == "empirical") {
        reject_unknown(obj, path, {"family", "atoms"});
        if (!obj.contains("atoms") || !obj.at("atoms").is_array()) {
            throw ConfigError("empirical distribution needs an \"atoms\" array");
        }
        for (const auto& pair : obj.at("atoms")) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                !pair[1].is_number()) {
                throw ConfigError("each atom must be a [x, p] number pair");
            }
            spec.atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
    } else {
        throw ConfigError("distribution.family must be \"exponential\" or \"empirical\"");
    }
    return spec;
}

PremiumSpec parse_premium(const ordered_json& obj) {
    const std::string path = "premium";
    PremiumSpec spec;
    spec.family = get_string(obj, path, "family", "");
    if (spec.family == "expected_value") {
        reject_unknown(obj, path, {"family", "theta"});
        spec.theta = get_number(obj, path, "theta");
    } else if (spec.family == "quadratic") {
        reject_unknown(obj, path, {"family", "alpha"});
        spec.alpha = get_number(obj, path, "alpha");
    } else if (spec.family == "stop_loss") {
        reject_unknown(obj, path, {"family", "loadings", "thresholds"});
        spec.loadings = get_number_array(obj, path, "loadings");
        spec.thresholds = get_number_array(obj, path, "thresholds");
    } else {
        throw ConfigError(
            "premium.family must be \"expected_value\", \"quadratic\", or \"stop_loss\"");
    }
    return spec;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    reject_unknown(root, "top level",
                   {"distribution", "premium", "gamma", "solver", "quadrature",
                    "output", "verify", "compare"});
    if (!root.contains("distribution") || !root.contains("premium") ||
        !root.contains("gamma")) {
        throw ConfigError("config requires \"distribution\", \"premium\", and \"gamma\"");
    }

    ScenarioConfig cfg;
    cfg.distribution = parse_distribution(root.at("distribution"));
    cfg.premium = parse_premium(root.at("premium"));
    cfg.gamma = get_number(root, "top level", "gamma");

    if (root.contains("solver")) {
        const auto& s = root.at("solver");
        reject_unknown(s, "solver", {"m_tolerance", "max_iterations", "root_tolerance", "m0"});
        cfg.m_tolerance = get_number(s, "solver", "m_tolerance", cfg.m_tolerance);
        cfg.max_iterations = get_int(s, "solver", "max_iterations", cfg.max_iterations);
        cfg.root_tolerance = get_number(s, "solver", "root_tolerance", cfg.root_tolerance);
        if (s.contains("m0")) {
            const auto& m0 = s.at("m0");
            if (m0.is_string()) {
                cfg.m0 = m0.get<std::string>();
                if (cfg.m0 != "lower" && cfg.m0 != "upper") {
                    throw ConfigError("solver.m0 must be \"lower\", \"upper\", or a number");
                }
            } else if (m0.is_number()) {
                std::ostringstream os;
                os.precision(17);
                os << m0.get<double>();
                cfg.m0 = os.str();
            } else {
                throw ConfigError("solver.m0 must be \"lower\", \"upper\", or a number");
            }
        }
    }

    if (root.contains("quadrature")) {
        const auto& q = root.at("quadrature");
        reject_unknown(q, "quadrature", {"tail_mass", "panels", "refinement_limit"});
        cfg.quadrature.truncation_tail_mass =
            get_number(q, "quadrature", "tail_mass", cfg.quadrature.truncation_tail_mass);
        cfg.quadrature.panel_count =
            get_int(q, "quadrature", "panels", cfg.quadrature.panel_count);
        cfg.quadrature.refinement_limit =
            get_int(q, "quadrature", "refinement_limit", cfg.quadrature.refinement_limit);
    }

    if (root.contains("output")) {
        const auto& o = root.at("output");
        reject_unknown(o, "output", {"grid_points", "grid_max"});
        cfg.output.grid_points = get_int(o, "output", "grid_points", cfg.output.grid_points);
        if (o.contains("grid_max") && !o.at("grid_max").is_null()) {
            cfg.output.grid_max = get_number(o, "output", "grid_max");
        }
    }

    if (root.contains("verify")) {
        const auto& v = root.at("verify");
        reject_unknown(v, "verify",
                       {"trials", "seed", "gap_tolerance", "comonotone_points",
                        "kappa_points", "kappa_tolerance", "self_consistency_factor"});
        cfg.verify.trials = get_int(v, "verify", "trials", cfg.verify.trials);
        if (v.contains("seed")) {
            if (!v.at("seed").is_number_integer()) {
                throw ConfigError("verify.seed must be an integer");
            }
            cfg.verify.seed = v.at("seed").get<std::uint64_t>();
        }
        cfg.verify.gap_tolerance =
            get_number(v, "verify", "gap_tolerance", cfg.verify.gap_tolerance);
        cfg.verify.comonotone_points =
            get_int(v, "verify", "comonotone_points", cfg.verify.comonotone_points);
        cfg.verify.kappa_points = get_int(v, "verify", "kappa_points", cfg.verify.kappa_points);
        cfg.verify.kappa_tolerance =
            get_number(v, "verify", "kappa_tolerance", cfg.verify.kappa_tolerance);
        cfg.verify.self_consistency_factor = get_number(
            v, "verify", "self_consistency_factor", cfg.verify.self_consistency_factor);
    }

    if (root.contains("compare")) {
        const auto& c = root.at("compare");
        reject_unknown(c, "compare", {"m_tolerance", "curve_tolerance", "grid_points"});
        cfg.compare.m_tolerance =
            get_number(c, "compare", "m_tolerance", cfg.compare.m_tolerance);
        cfg.compare.curve_tolerance =
            get_number(c, "compare", "curve_tolerance", cfg.compare.curve_tolerance);
        cfg.compare.grid_points =
            get_int(c, "compare", "grid_points", cfg.compare.grid_points);
    }

    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::string ScenarioConfig::to_json_text() const {
    ordered_json root;

    ordered_json dist;
    dist["family"] = distribution.family;
    if (distribution.family == "exponential") {
        dist["lambda"] = distribution.lambda;
    } else {
        ordered_json atoms = ordered_json::array();
        for (const Atom& a : distribution.atoms) {
            atoms.push_back(ordered_json::array({a.x, a.p}));
        }
        dist["atoms"] = atoms;
    }
    root["distribution"] = dist;

    ordered_json prem;
    prem["family"] = premium.family;
    if (premium.family == "expected_value") {
        prem["theta"] = premium.theta;
    } else if (premium.family == "quadratic") {
        prem["alpha"] = premium.alpha;
    } else {
        prem["loadings"] = premium.loadings;
        prem["thresholds"] = premium.thresholds;
    }
    root["premium"] = prem;

    root["gamma"] = gamma;

    ordered_json solver;
    solver["m_tolerance"] = m_tolerance;
    solver["max_iterations"] = max_iterations;
    solver["root_tolerance"] = root_tolerance;
    if (m0 == "lower" || m0 == "upper") {
        solver["m0"] = m0;
    } else {
        solver["m0"] = std::stod(m0);
    }
    root["solver"] = solver;

    ordered_json quad;
    quad["tail_mass"] = quadrature.truncation_tail_mass;
    quad["panels"] = quadrature.panel_count;
    quad["refinement_limit"] = quadrature.refinement_limit;
    root["quadrature"] = quad;

    ordered_json out;
    out["grid_points"] = output.grid_points;
    out["grid_max"] = output.grid_max ? ordered_json(*output.grid_max) : ordered_json();
    root["output"] = out;

    ordered_json ver;
    ver["trials"] = verify.trials;
    ver["seed"] = verify.seed;
    ver["gap_tolerance"] = verify.gap_tolerance;
    ver["comonotone_points"] = verify.comonotone_points;
    ver["kappa_points"] = verify.kappa_points;
    ver["kappa_tolerance"] = verify.kappa_tolerance;
    ver["self_consistency_factor"] = verify.self_consistency_factor;
    root["verify"] = ver;

    ordered_json cmp;
    cmp["m_tolerance"] = compare.m_tolerance;
    cmp["curve_tolerance"] = compare.curve_tolerance;
    cmp["grid_points"] = compare.grid_points;
    root["compare"] = cmp;

    return root.dump(2) + "\n";
}

LossDistribution ScenarioConfig::make_distribution() const {
    if (distribution.family == "exponential") {
        return LossDistribution::exponential(distribution.lambda);
    }
    return LossDistribution::empirical(distribution.atoms);
}

PremiumFunction ScenarioConfig::make_premium() const {
    if (premium.family == "expected_value") {
        return PremiumFunction::expected_value(premium.theta);
    }
    if (premium.family == "quadratic") {
        return PremiumFunction::quadratic(premium.alpha);
    }
    return PremiumFunction::stop_loss(premium.loadings, premium.thresholds);
}

SolverConfig ScenarioConfig::make_solver_config() const {
    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.m_tolerance = m_tolerance;
    cfg.max_iterations = max_iterations;
    cfg.root_tolerance = root_tolerance;
    cfg.quadrature = quadrature;
    if (m0 == "lower") {
        cfg.m0_strategy = M0Strategy::LowerEndpoint;
    } else if (m0 == "upper") {
        cfg.m0_strategy = M0Strategy::UpperEndpoint;
    } else {
        cfg.m0_strategy = M0Strategy::Custom;
        try {
            cfg.m0_custom = std::stod(m0);
        } catch (const std::exception&) {
            throw ConfigError("solver.m0 is not a number: " + m0);
        }
    }
    return cfg;
}

}  // namespace insopt
