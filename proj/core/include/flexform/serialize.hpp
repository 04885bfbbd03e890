#pragma once

#include "flexform/equilibria.hpp"
#include "flexform/graph.hpp"
#include "flexform/integrator.hpp"
#include "flexform/potential.hpp"
#include "flexform/stability.hpp"

#include <string>
#include <vector>

namespace flexform {

/// Header t, x1, y1(, z1), ..., e_<i><j> per edge, gradnorm; one row per
/// recorded state.
std::string trajectory_csv(const Trajectory& trajectory, const FormationGraph& graph);

/// Events, run status and the Lyapunov log.
std::string events_json(const Trajectory& trajectory);

/// Trajectory as a JSON document (same content as the CSV plus events).
std::string trajectory_json(const Trajectory& trajectory, const FormationGraph& graph);

std::string realization_json(const Realization& p);

std::string report_json(const StabilityReport& report, const FormationGraph& graph);

/// One JSON-lines record per catalog attempt. `report` may be null.
std::string catalog_line(const CatalogAttempt& attempt, const StabilityReport* report);

/// Assumption-check verdict over a grid.
std::string assumption_json(const PotentialFamily& family, double dbar,
                            const std::vector<double>& grid,
                            const std::vector<AssumptionViolation>& violations);

}  // namespace flexform
