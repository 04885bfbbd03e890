#pragma once

#include "flexform/controller.hpp"
#include "flexform/graph.hpp"
#include "flexform/integrator.hpp"
#include "flexform/potential.hpp"
#include "flexform/stability.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexform {

/// Malformed or inconsistent configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalysisFlags {
  bool hessian_at_equilibria = false;
  bool catalog = false;
  bool lemma_verify = false;
};

struct Scenario {
  std::string name;
  FormationGraph graph;
  std::string potential_tag;
  PotentialFamily family;
  Realization initial;
  IntegrationOptions options;
  LeaderSpec leader;
  AnalysisFlags analysis;
};

/// {"dimension": d, "nodes": n, "edges": [[i, j, dbar], ...], "flex_edge": [i, j]}
/// with 1-based node indices.
FormationGraph parse_graph(std::string_view json);

/// Positions as [[x, y(, z)], ...] or {"positions": [...]}.
Realization parse_realization(std::string_view json);

/// Full scenario document. `seed` overrides the seed of randomized
/// perturbation events that do not carry their own.
Scenario parse_scenario(std::string_view json, std::optional<std::uint64_t> seed = {});

std::string read_text_file(const std::filesystem::path& path);

struct ScenarioRun {
  Trajectory trajectory;
  /// One report per detected equilibrium, when requested.
  std::vector<std::pair<double, StabilityReport>> reports;
  bool lyapunov_ok = true;
};

ScenarioRun run_scenario(const Scenario& scenario, const AnalysisOptions& analysis = {});

}  // namespace flexform
