#include "lpm/config.hpp"

#include <fstream>
#include <sstream>

#include "lpm/errors.hpp"
#include "lpm/sha256.hpp"

namespace lpm {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

const json& expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) bad_field(path, "expected an object");
    return j;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

double opt_number(const json& j, const char* key, const std::string& path, double def) {
    if (!j.contains(key)) return def;
    return get_number(j.at(key), path + "." + key);
}

std::uint64_t opt_uint(const json& j, const char* key, const std::string& path,
                       std::uint64_t def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.is_number_float() || v.get<double>() < 0)
        bad_field(path + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

int opt_int(const json& j, const char* key, const std::string& path, int def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer()) bad_field(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool opt_bool(const json& j, const char* key, const std::string& path, bool def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) bad_field(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string opt_string(const json& j, const char* key, const std::string& path,
                       std::string def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) bad_field(path + "." + key, "expected a string");
    return v.get<std::string>();
}

CountLaw parse_count(const json& j) {
    expect_object(j, "count_law");
    const std::string kind = opt_string(j, "kind", "count_law", "deterministic");
    json params = json::object();
    if (j.contains("params")) params = expect_object(j.at("params"), "count_law.params");
    const std::string path = "count_law.params";
    try {
        if (kind == "deterministic") {
            const int k = opt_int(params, "children", path, 2);
            if (k < 0) bad_field(path + ".children", "must be >= 2");
            return CountLaw::deterministic(static_cast<std::uint32_t>(k));
        }
        if (kind == "poisson") return CountLaw::poisson(opt_number(params, "mean", path, 2.0));
        if (kind == "geometric")
            return CountLaw::geometric(opt_number(params, "mean", path, 2.0));
        if (kind == "geometric_ge1")
            return CountLaw::geometric_ge1(opt_number(params, "p", path, 0.5));
    } catch (const ConfigError& e) {
        bad_field(path, e.what());
    }
    bad_field("count_law.kind", "unknown kind '" + kind +
                                    "' (deterministic | poisson | geometric | geometric_ge1)");
}

DisplacementLaw parse_displacement(const json& j) {
    expect_object(j, "displacement_law");
    const std::string kind = opt_string(j, "kind", "displacement_law", "gaussian");
    json params = json::object();
    if (j.contains("params"))
        params = expect_object(j.at("params"), "displacement_law.params");
    const std::string path = "displacement_law.params";
    try {
        if (kind == "gaussian")
            return DisplacementLaw::gaussian(opt_number(params, "mean", path, 0.0),
                                             opt_number(params, "sd", path, 1.0));
        if (kind == "uniform")
            return DisplacementLaw::uniform(opt_number(params, "lo", path, -1.0),
                                            opt_number(params, "hi", path, 1.0));
        if (kind == "shifted_exponential")
            return DisplacementLaw::shifted_exponential(opt_number(params, "rate", path, 1.0),
                                                        opt_number(params, "shift", path, 0.0));
    } catch (const ConfigError& e) {
        bad_field(path, e.what());
    }
    bad_field("displacement_law.kind",
              "unknown kind '" + kind + "' (gaussian | uniform | shifted_exponential)");
}

PerturbLaw parse_perturbation(const json& j) {
    expect_object(j, "perturbation");
    const std::string kind = opt_string(j, "kind", "perturbation", "point_mass");
    if (kind == "point_mass")
        return PerturbLaw::point_mass(opt_number(j, "at", "perturbation", 0.0));
    if (kind == "tail") {
        try {
            return PerturbLaw::tail(TailLaw(opt_number(j, "theta", "perturbation", 1.0),
                                            opt_number(j, "alpha", "perturbation", 0.0),
                                            opt_number(j, "c", "perturbation", 1.0)));
        } catch (const ConfigError& e) {
            bad_field("perturbation", e.what());
        }
    }
    bad_field("perturbation.kind", "unknown kind '" + kind + "' (tail | point_mass)");
}

json count_to_json(const CountLaw& c) {
    json j;
    switch (c.kind()) {
        case CountLaw::Kind::deterministic:
            j["kind"] = "deterministic";
            j["params"]["children"] = static_cast<int>(c.param());
            break;
        case CountLaw::Kind::poisson:
            j["kind"] = "poisson";
            j["params"]["mean"] = c.param();
            break;
        case CountLaw::Kind::geometric_ge1:
            j["kind"] = "geometric_ge1";
            j["params"]["p"] = c.param();
            break;
    }
    return j;
}

json displacement_to_json(const DisplacementLaw& d) {
    json j;
    switch (d.kind()) {
        case DisplacementLaw::Kind::gaussian:
            j["kind"] = "gaussian";
            j["params"]["mean"] = d.param_a();
            j["params"]["sd"] = d.param_b();
            break;
        case DisplacementLaw::Kind::uniform:
            j["kind"] = "uniform";
            j["params"]["lo"] = d.param_a();
            j["params"]["hi"] = d.param_b();
            break;
        case DisplacementLaw::Kind::shifted_exponential:
            j["kind"] = "shifted_exponential";
            j["params"]["rate"] = d.param_a();
            j["params"]["shift"] = d.param_b();
            break;
    }
    return j;
}

json perturbation_to_json(const PerturbLaw& p) {
    json j;
    if (p.is_point_mass()) {
        j["kind"] = "point_mass";
        j["at"] = p.atom();
    } else {
        j["kind"] = "tail";
        j["theta"] = p.tail_law().theta();
        j["alpha"] = p.tail_law().alpha();
        j["c"] = p.tail_law().c();
    }
    return j;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
    expect_object(j, "(root)");
    RunConfig cfg;

    if (j.contains("count_law")) cfg.law.count = parse_count(j.at("count_law"));
    if (j.contains("displacement_law"))
        cfg.law.displacement = parse_displacement(j.at("displacement_law"));
    if (j.contains("perturbation")) cfg.nu = parse_perturbation(j.at("perturbation"));

    cfg.n = opt_int(j, "n", "(root)", cfg.n);
    if (cfg.n < 1) bad_field("n", "must be >= 1");
    if (j.contains("n_list")) {
        const json& nl = j.at("n_list");
        if (!nl.is_array()) bad_field("n_list", "expected an array of integers");
        cfg.n_list.clear();
        for (std::size_t i = 0; i < nl.size(); ++i) {
            if (!nl[i].is_number_integer())
                bad_field("n_list[" + std::to_string(i) + "]", "expected an integer");
            cfg.n_list.push_back(nl[i].get<int>());
        }
    }
    cfg.runs = opt_uint(j, "runs", "(root)", cfg.runs);
    if (j.contains("thetas")) {
        const json& ts = j.at("thetas");
        if (!ts.is_array()) bad_field("thetas", "expected an array of numbers");
        cfg.thetas.clear();
        for (std::size_t i = 0; i < ts.size(); ++i)
            cfg.thetas.push_back(get_number(ts[i], "thetas[" + std::to_string(i) + "]"));
    }
    if (j.contains("window")) {
        const json& w = expect_object(j.at("window"), "window");
        cfg.window.lo = opt_number(w, "lo", "window", cfg.window.lo);
        cfg.window.hi = opt_number(w, "hi", "window", cfg.window.hi);
        if (!(cfg.window.lo < cfg.window.hi)) bad_field("window", "needs lo < hi");
    }
    cfg.budget = opt_uint(j, "budget", "(root)", cfg.budget);
    cfg.eps_prune = opt_number(j, "eps_prune", "(root)", cfg.eps_prune);
    if (!(cfg.eps_prune > 0.0)) bad_field("eps_prune", "must be positive");
    cfg.seed = opt_uint(j, "seed", "(root)", cfg.seed);
    cfg.threads = opt_int(j, "threads", "(root)", cfg.threads);
    if (cfg.threads < 0) bad_field("threads", "must be >= 0");
    cfg.out = opt_string(j, "out", "(root)", cfg.out);

    if (j.contains("suite")) {
        const json& s = expect_object(j.at("suite"), "suite");
        cfg.suite.kind = opt_string(s, "kind", "suite", cfg.suite.kind);
        if (cfg.suite.kind != "laplace" && cfg.suite.kind != "speed" &&
            cfg.suite.kind != "stabilization")
            bad_field("suite.kind", "unknown kind '" + cfg.suite.kind +
                                        "' (laplace | speed | stabilization)");
        cfg.suite.theorem = opt_string(s, "theorem", "suite", cfg.suite.theorem);
        if (s.contains("phis")) {
            const json& ps = s.at("phis");
            if (!ps.is_array()) bad_field("suite.phis", "expected an array of [center, half_width, height] triples");
            cfg.suite.phis.clear();
            for (std::size_t i = 0; i < ps.size(); ++i) {
                const std::string path = "suite.phis[" + std::to_string(i) + "]";
                if (!ps[i].is_array() || ps[i].size() != 3)
                    bad_field(path, "expected [center, half_width, height]");
                cfg.suite.phis.push_back({get_number(ps[i][0], path + "[0]"),
                                          get_number(ps[i][1], path + "[1]"),
                                          get_number(ps[i][2], path + "[2]")});
            }
        }
        cfg.suite.tol_abs = opt_number(s, "tol_abs", "suite", cfg.suite.tol_abs);
        cfg.suite.max_law = opt_bool(s, "max_law", "suite", cfg.suite.max_law);
        cfg.suite.max_law_tol = opt_number(s, "max_law_tol", "suite", cfg.suite.max_law_tol);
        cfg.suite.control = opt_bool(s, "control", "suite", cfg.suite.control);
        cfg.suite.control_runs = opt_uint(s, "control_runs", "suite", cfg.suite.control_runs);
        cfg.suite.control_shift =
            opt_number(s, "control_shift", "suite", cfg.suite.control_shift);
        cfg.suite.ks_level = opt_number(s, "ks_level", "suite", cfg.suite.ks_level);
        if (!(cfg.suite.ks_level > 0.0 && cfg.suite.ks_level < 1.0))
            bad_field("suite.ks_level", "must lie in (0,1)");
    }

    if (j.contains("many2one")) {
        const json& m = expect_object(j.at("many2one"), "many2one");
        cfg.m2o.theta = opt_number(m, "theta", "many2one", cfg.m2o.theta);
        cfg.m2o.n = opt_int(m, "n", "many2one", cfg.m2o.n);
        cfg.m2o.threshold = opt_number(m, "threshold", "many2one", cfg.m2o.threshold);
        cfg.m2o.tree_runs = opt_uint(m, "tree_runs", "many2one", cfg.m2o.tree_runs);
        cfg.m2o.spine_runs = opt_uint(m, "spine_runs", "many2one", cfg.m2o.spine_runs);
        if (m.contains("seeds")) {
            const json& ss = m.at("seeds");
            if (!ss.is_array()) bad_field("many2one.seeds", "expected an array of integers");
            cfg.m2o.seeds.clear();
            for (std::size_t i = 0; i < ss.size(); ++i) {
                if (!ss[i].is_number_integer())
                    bad_field("many2one.seeds[" + std::to_string(i) + "]",
                              "expected an integer");
                cfg.m2o.seeds.push_back(ss[i].get<std::uint64_t>());
            }
        }
    }

    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

RunConfig load_config_file(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    json j;
    j["count_law"] = count_to_json(cfg.law.count);
    j["displacement_law"] = displacement_to_json(cfg.law.displacement);
    j["perturbation"] = perturbation_to_json(cfg.nu);
    j["n"] = cfg.n;
    j["n_list"] = cfg.n_list;
    j["runs"] = cfg.runs;
    j["thetas"] = cfg.thetas;
    j["window"]["lo"] = cfg.window.lo;
    j["window"]["hi"] = cfg.window.hi;
    j["budget"] = cfg.budget;
    j["eps_prune"] = cfg.eps_prune;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["out"] = cfg.out;
    j["suite"]["kind"] = cfg.suite.kind;
    j["suite"]["theorem"] = cfg.suite.theorem;
    j["suite"]["phis"] = cfg.suite.phis;
    j["suite"]["tol_abs"] = cfg.suite.tol_abs;
    j["suite"]["max_law"] = cfg.suite.max_law;
    j["suite"]["max_law_tol"] = cfg.suite.max_law_tol;
    j["suite"]["control"] = cfg.suite.control;
    j["suite"]["control_runs"] = cfg.suite.control_runs;
    j["suite"]["control_shift"] = cfg.suite.control_shift;
    j["suite"]["ks_level"] = cfg.suite.ks_level;
    j["many2one"]["theta"] = cfg.m2o.theta;
    j["many2one"]["n"] = cfg.m2o.n;
    j["many2one"]["threshold"] = cfg.m2o.threshold;
    j["many2one"]["tree_runs"] = cfg.m2o.tree_runs;
    j["many2one"]["spine_runs"] = cfg.m2o.spine_runs;
    j["many2one"]["seeds"] = cfg.m2o.seeds;
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    // The hash pins the experiment definition; execution details (worker
    // count, output location) must not change it, or reports would stop
    // being comparable across machines.
    json j = config_to_json(cfg);
    j.erase("threads");
    j.erase("out");
    return sha256_hex(j.dump());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace lpm
