#pragma once

// One mapping from the file-level RunConfig to each engine/suite configuration
// and one payload shape per operation, shared by every frontend (CLI, python
// module).  Keeping these here means a report produced through one surface is
// byte-compatible with the other.

#include <string>
#include <vector>

#include "json.hpp"
#include "lpm/config.hpp"
#include "lpm/engine.hpp"
#include "lpm/verify.hpp"

namespace lpm {

// "T1.1" | "T1.2" | "T1.3"; "T1.4" points the caller at the stabilization
// suite instead, anything else is a ConfigError naming the field.
TheoremId parse_theorem_name(const std::string& name);

// Centering: tail perturbations use the regime centering m_n (needs n >= 2),
// point-mass runs fall back to n * v when the critical tilt exists.
SimConfig sim_from_config(const RunConfig& cfg);

SuiteConfig laplace_from_config(const RunConfig& cfg);
SpeedConfig speed_from_config(const RunConfig& cfg);
StabilizationConfig stabilization_from_config(const RunConfig& cfg);

// The speed suite's pass line: corrected relative error within 2%.
Verdict speed_verdict(const SpeedResult& r);

nlohmann::json analyze_payload(const RunConfig& cfg);

// One entry per run.  When atom_rows is non-null it receives every retained
// particle's centered perturbed value per run (descending, unwindowed); when
// embed_atoms is set each entry also carries the windowed atom array.
nlohmann::json simulate_payload(const RunConfig& cfg, bool embed_atoms,
                                std::vector<std::vector<double>>* atom_rows);

nlohmann::json many_to_one_payload(const RunConfig& cfg);

}  // namespace lpm
