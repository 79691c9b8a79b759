#pragma once

// JSON run configuration: parsing with field-level error messages, canonical
// serialization (sorted keys, every field emitted), and a stable hash.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpm/offspring_law.hpp"
#include "lpm/tail_law.hpp"

namespace lpm {

struct WindowSpec {
    double lo = -4.0;
    double hi = 12.0;
};

struct SuiteSpec {
    std::string kind = "laplace";  // laplace | speed | stabilization
    std::string theorem = "T1.1";  // laplace suites only
    std::vector<std::array<double, 3>> phis{{0.0, 1.0, 1.0}};  // tent rows: center, half_width, height
    double tol_abs = 0.0;          // 0 = regime default
    bool max_law = true;
    double max_law_tol = 0.03;
    bool control = true;
    std::uint64_t control_runs = 2000;
    double control_shift = 1.0;
    double ks_level = 0.01;        // stabilization suite
};

struct ManyToOneSpec {
    double theta = 1.0;
    int n = 3;
    double threshold = 2.0;  // functional: indicator {T_n <= threshold}
    std::uint64_t tree_runs = 100000;
    std::uint64_t spine_runs = 100000;
    std::vector<std::uint64_t> seeds;  // empty -> the master seed only
};

struct RunConfig {
    OffspringLaw law;  // defaults to binary branching with standard normal steps
    PerturbLaw nu = PerturbLaw::point_mass(0.0);
    int n = 10;
    std::vector<int> n_list{10, 15, 20};
    std::uint64_t runs = 1000;
    std::vector<double> thetas{1.0};
    WindowSpec window;
    std::uint64_t budget = 1ull << 22;
    double eps_prune = 1.0;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = resolve from env/hardware
    std::string out = "out";
    SuiteSpec suite;
    ManyToOneSpec m2o;
};

// Throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Canonical form: every field present, keys sorted (nlohmann's object order).
nlohmann::json config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);  // sha256 of the canonical dump

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lpm
