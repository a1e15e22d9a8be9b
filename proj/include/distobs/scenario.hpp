#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "distobs/conditions.hpp"
#include "distobs/design.hpp"
#include "distobs/simkit.hpp"

namespace distobs {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

struct SwitchingSpec {
    int T = 1;
    double drop_prob = 0.0;
    std::uint64_t seed = 0;
    std::optional<SwitchingSignal> fixed;  // explicit modes + schedule instead of random drops
};

struct SimulationSpec {
    Vector x0;
    std::vector<Vector> est0;
    int K = 0;
    std::optional<SwitchingSpec> switching;
};

struct Scenario {
    std::string name;
    Plant plant;
    Digraph graph;
    Scheme scheme = Scheme::Auto;
    DesignOptions options;
    std::optional<SimulationSpec> simulation;
    std::string hash;  // of the canonical JSON text
};

Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::string& path);

Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);

Json report_to_json(const FeasibilityReport& r);
std::string report_to_text(const FeasibilityReport& r);

Json bank_to_json(const ObserverBank& bank);
ObserverBank bank_from_json(const Json& j);

// The switching signal a scenario asks for, if any. `seed` overrides the
// scenario's seed.
std::optional<SwitchingSignal> scenario_signal(const Scenario& s, const ObserverBank& bank,
                                               std::optional<std::uint64_t> seed = std::nullopt);

SimulationTrace run_scenario(const Scenario& s, const ObserverBank& bank,
                             std::optional<std::uint64_t> seed = std::nullopt);

void write_trace_csv(std::ostream& os, const SimulationTrace& tr);
Json summary_to_json(const SimulationTrace& tr, double eps = 1e-6);

}  // namespace distobs
