#pragma once

#include "flexform/graph.hpp"
#include "flexform/kernels.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace flexform {

/// Hessian of V and the factors it is assembled from.
struct HessianBundle {
  int dimension = 0;
  Eigen::MatrixXd H;               // (n d) x (n d), agent-major coordinates
  Eigen::MatrixXd M;               // (m d) x (m d), blocks 2 rho z z^T + g I
  Eigen::MatrixXd B;               // n x m incidence
  Eigen::MatrixXd E;               // n x n, B diag(g) B^T
  std::vector<Eigen::MatrixXd> R;  // per axis a: m x n, diag(sqrt(rho) z[a]) B^T
  std::vector<EdgeState> edges;
};

HessianBundle assemble_hessian(const Realization& p, const FormationGraph& graph,
                               const PotentialFamily& family);
HessianBundle assemble_hessian(const EdgeSet& edges, const Eigen::VectorXd& p,
                               const PotentialFamily& family);

/// Hessian in a rotated frame with coordinates grouped by axis.
struct CoordinateBlocks {
  Eigen::MatrixXd rotation;             // d x d, rows are the new axes
  Eigen::MatrixXd sorted;               // [x_1..x_n, y_1..y_n, ...] ordering
  std::vector<Eigen::MatrixXd> blocks;  // H_aa = 2 R_a^T R_a + E in the rotated frame
};

/// Throws std::invalid_argument when `rotation` is not orthogonal.
CoordinateBlocks coordinate_blocks(const HessianBundle& bundle, const Eigen::MatrixXd& rotation);

struct SpectrumCheck {
  Eigen::VectorXd eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  double tolerance = 0.0;
  bool psd = true;
  int zero_count = 0;
};

/// Default tolerance: 1e-8 times the spectral norm.
double default_eig_tolerance(const Eigen::MatrixXd& matrix);

/// Not PSD iff the smallest eigenvalue is below -tolerance. Throws
/// std::runtime_error if the eigensolver fails and std::invalid_argument for
/// a non-symmetric input.
SpectrumCheck psd_check(const Eigen::MatrixXd& matrix, std::optional<double> tolerance = {});

}  // namespace flexform
