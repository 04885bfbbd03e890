#pragma once

#include "flexform/graph.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace flexform {

enum class EquilibriumKind {
  Desired,
  UndesiredQI1,    // flex agent on top of its anchor
  UndesiredQI2,    // rigid agents collinear (2-D) or coplanar (3-D)
  UndesiredOther,  // an undesired equilibrium outside both sets
  NotEquilibrium,
};

std::string to_string(EquilibriumKind kind);

struct ClassifyTolerances {
  double equilibrium = 1e-9;  // balance residual
  double shape = 1e-6;        // max |e| for the desired set
  double position = 1e-7;     // coincidence, relative to the formation size
  double geometry = 1e-7;     // flatness, relative to the formation size
};

struct EquilibriumClass {
  EquilibriumKind kind = EquilibriumKind::NotEquilibrium;
  /// "2a".."2c" or "3a".."3h"; empty when no subform applies.
  std::string subform;
  std::string subform_name;
  /// Zero-based agents playing the roles i, j, k (and l) of the subform.
  std::vector<int> roles;

  double residual = 0.0;
  double max_shape_error = 0.0;
  double flex_length = 0.0;
  /// Smallest relevant singular value of the centred rigid positions
  /// (second for 2-D, third for 3-D), divided by the formation size.
  double flatness = 0.0;
  double scale = 1.0;
  /// Ambiguities (quantities within a factor 10 of a threshold) and other
  /// remarks. Classification never silently resolves a borderline case.
  std::vector<std::string> notes;

  bool undesired() const {
    return kind == EquilibriumKind::UndesiredQI1 || kind == EquilibriumKind::UndesiredQI2 ||
           kind == EquilibriumKind::UndesiredOther;
  }
};

EquilibriumClass classify(const Realization& p, const FormationGraph& graph,
                          const PotentialFamily& family, const ClassifyTolerances& tol = {});

/// Rotation whose last row is the normal of the rigid agents' line (2-D) or
/// plane (3-D): principal axes of the centred rigid positions, in decreasing
/// variance. When the rigid agents span fewer than d-1 directions the flex
/// offset is added to the in-plane set so that it too is orthogonal to the
/// normal.
Eigen::MatrixXd alignment_frame(const Realization& p, const FormationGraph& graph,
                                double geometry_tol = 1e-7);

}  // namespace flexform
