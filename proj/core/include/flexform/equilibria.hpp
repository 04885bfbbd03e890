#pragma once

#include "flexform/classify.hpp"
#include "flexform/graph.hpp"
#include "flexform/integrator.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flexform {

/// A requested equilibrium could not be built; the message carries the
/// diagnostics (brackets, residuals, reached class).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ConstructionMethod { RootfindCollinear, RootfindCoplanar, CoincidenceConstruct, FlowCapture };

std::string to_string(ConstructionMethod method);

struct CatalogEntry {
  std::string label;  // "2a".."3h", "QI1" or "desired"
  Realization p;
  EquilibriumClass classification;
  double residual = 0.0;
  ConstructionMethod method = ConstructionMethod::RootfindCollinear;
  std::vector<std::string> notes;
};

/// A desired realization by trilateration (certified topologies only). The
/// flex agent sits at its desired distance along +x from its anchor.
Realization realize_desired(const FormationGraph& graph);

struct PolishResult {
  Eigen::VectorXd p;
  double residual = 0.0;  // max_i |u_i|
  int iterations = 0;
  bool converged = false;
};

/// Newton iteration on the balance map u(p) = 0 with the pseudo-inverse of
/// the analytic Hessian and a backtracking line search on the residual.
PolishResult polish_equilibrium(const EdgeSet& edges, const Eigen::VectorXd& p,
                                const PotentialFamily& family, double tolerance = 1e-12,
                                int max_iterations = 100);

struct CollinearOptions {
  int middle = 2;            // zero-based agent between the other two
  bool flex_on_axis = false; // otherwise perpendicular to the line
  double tolerance = 1e-12;
  int max_iterations = 100;
};

/// Three distinct collinear rigid agents (triangle topology) from a Newton
/// solve on the two gap lengths.
CatalogEntry find_collinear_equilibrium(const FormationGraph& graph, const PotentialFamily& family,
                                        const CollinearOptions& options = {});

/// Agents `pair` coincident, the third at the common desired distance.
CatalogEntry construct_coincident_pair_2d(const FormationGraph& graph,
                                          const PotentialFamily& family,
                                          std::pair<int, int> pair = {1, 2});
/// All three rigid agents coincident.
CatalogEntry construct_all_coincident_2d(const FormationGraph& graph, const PotentialFamily& family);
/// Desired rigid shape with the flex agent on top of its anchor.
CatalogEntry construct_flex_collapse(const FormationGraph& graph, const PotentialFamily& family);

struct CoplanarOptions {
  double tolerance = 1e-12;
  int max_iterations = 200;
  int flow_steps = 20000;
};

/// Coplanar equilibrium of the tetrahedron topology with subform `subform`
/// ('a'..'h'). Coincidence subforms are built directly; the others come from
/// seeded flows restricted to a plane or line followed by Newton polish.
/// Throws ConstructionError when no equilibrium of that subform is found.
CatalogEntry find_coplanar_equilibrium(const FormationGraph& graph, const PotentialFamily& family,
                                       char subform, const CoplanarOptions& options = {});

struct CaptureCriteria {
  double detect_tol = 1e-6;
  double t_max = 5.0;
  double polish_tol = 1e-12;
  /// Accept the first local minimum of |grad V| along the flow when the
  /// detector never fires, provided it is below `near_miss_tol`.
  bool accept_near_miss = true;
  double near_miss_tol = 0.5;
  StepControl step{StepMode::Fixed, 2.5e-4};
};

/// Integrates until the balance residual drops below `detect_tol`, then
/// polishes and classifies. Throws ConstructionError when nothing is reached.
CatalogEntry capture_equilibrium_from_flow(const Realization& p0, const ClosedLoop& system,
                                           const CaptureCriteria& criteria = {});

struct ShootingResult {
  double value = 0.0;       // refined coordinate
  double bracket = 0.0;     // final bracket width
  int iterations = 0;
};

/// Bisection on one coordinate of one agent's initial position so that the
/// flow lands on the stable manifold of the saddle it passes. The two sides
/// are told apart by the sign of the rigid simplex volume at `probe_time`.
/// Throws ConstructionError if [lo, hi] does not bracket a side change.
ShootingResult shoot_to_saddle(const Realization& p0, const ClosedLoop& system, int agent,
                               int axis, double lo, double hi, double probe_time,
                               const StepControl& step = {StepMode::Fixed, 2.5e-4},
                               double width_tol = 1e-13, int max_iterations = 80);

/// Signed volume (area in 2-D) of the simplex spanned by the first d+1 agents.
double rigid_simplex_volume(const Realization& p);

struct CatalogAttempt {
  std::string label;
  std::optional<CatalogEntry> entry;
  std::string error;
};

/// Builds every subform of the topology ("2a", "2b", "2c", "QI1" or
/// "3a".."3h", "QI1"), or only those in `labels` when non-empty.
std::vector<CatalogAttempt> build_catalog(const FormationGraph& graph,
                                          const PotentialFamily& family,
                                          const std::vector<std::string>& labels = {});

}  // namespace flexform
