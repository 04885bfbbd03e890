#pragma once

#include "flexform/graph.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <vector>

namespace flexform {

/// Per-edge quantities at a configuration.
struct EdgeState {
  Eigen::VectorXd z;   // p_i - p_j
  double error = 0.0;  // |z|^2 - dbar^2
  double g = 0.0;
  double rho = 0.0;
};

/// Low-level kernels over a raw edge list and a stacked position vector.
/// They back the graph-level API and are also used on reduced problems
/// (rigid subgraphs restricted to a line or a plane).
namespace kernels {

std::vector<EdgeState> edge_states(const EdgeSet& edges, const Eigen::VectorXd& p,
                                   const PotentialFamily& family);

/// u_i = -sum_j g_ij z_ij for every node.
Eigen::VectorXd control_field(const EdgeSet& edges, const Eigen::VectorXd& p,
                              const PotentialFamily& family);

/// V = 1/2 sum over edges of phi(e). With this normalization -grad V is
/// exactly control_field().
double potential(const EdgeSet& edges, const Eigen::VectorXd& p,
                 const PotentialFamily& family);

/// Hessian of V: blocks 2 rho z z^T + g I assembled through the incidence
/// pattern.
Eigen::MatrixXd hessian(const EdgeSet& edges, const Eigen::VectorXd& p,
                        const PotentialFamily& family);

/// max_i |u_i|.
double balance_residual(const EdgeSet& edges, const Eigen::VectorXd& p,
                        const PotentialFamily& family);

}  // namespace kernels
}  // namespace flexform
