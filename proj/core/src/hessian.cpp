#include "flexform/hessian.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace flexform {

namespace {

Eigen::MatrixXd lift(const Eigen::MatrixXd& B, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(B.rows() * d, B.cols() * d);
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    for (Eigen::Index k = 0; k < B.cols(); ++k) {
      if (B(i, k) == 0.0) continue;
      for (int a = 0; a < d; ++a) out(i * d + a, k * d + a) = B(i, k);
    }
  }
  return out;
}

}  // namespace

HessianBundle assemble_hessian(const EdgeSet& edges, const Eigen::VectorXd& p,
                               const PotentialFamily& family) {
  const int d = edges.dimension;
  const int m = static_cast<int>(edges.edges.size());

  HessianBundle out;
  out.dimension = d;
  out.edges = kernels::edge_states(edges, p, family);

  out.B = build_incidence(edges);
  const Eigen::MatrixXd& B = out.B;
  out.M = Eigen::MatrixXd::Zero(m * d, m * d);
  Eigen::VectorXd g(m);
  for (int k = 0; k < m; ++k) {
    const auto& s = out.edges[static_cast<std::size_t>(k)];
    out.M.block(k * d, k * d, d, d) =
        2.0 * s.rho * s.z * s.z.transpose() + s.g * Eigen::MatrixXd::Identity(d, d);
    g[k] = s.g;
  }
  out.E = B * g.asDiagonal() * B.transpose();

  out.R.resize(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd w(m);
    for (int k = 0; k < m; ++k) {
      const auto& s = out.edges[static_cast<std::size_t>(k)];
      w[k] = std::sqrt(s.rho) * s.z[a];
    }
    out.R[static_cast<std::size_t>(a)] = w.asDiagonal() * B.transpose();
  }

  const Eigen::MatrixXd Bbar = lift(B, d);
  out.H = Bbar * out.M * Bbar.transpose();
  return out;
}

HessianBundle assemble_hessian(const Realization& p, const FormationGraph& graph,
                               const PotentialFamily& family) {
  require_compatible(p, graph);
  return assemble_hessian(graph.view(), p.stacked(), family);
}

CoordinateBlocks coordinate_blocks(const HessianBundle& bundle, const Eigen::MatrixXd& rotation) {
  const int d = bundle.dimension;
  if (rotation.rows() != d || rotation.cols() != d) {
    throw std::invalid_argument("frame rotation must be d x d");
  }
  const double defect =
      (rotation * rotation.transpose() - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(defect < 1e-10)) throw std::invalid_argument("frame rotation is not orthogonal");

  const Eigen::Index n = bundle.H.rows() / d;
  // T rotates each agent block and regroups coordinates by axis.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      T.row(a * n + i).segment(i * d, d) = rotation.row(a);
    }
  }

  CoordinateBlocks out;
  out.rotation = rotation;
  out.sorted = T * bundle.H * T.transpose();

  const Eigen::Index m = static_cast<Eigen::Index>(bundle.edges.size());
  const Eigen::MatrixXd BT = bundle.B.transpose();
  out.blocks.reserve(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd w(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto& s = bundle.edges[static_cast<std::size_t>(k)];
      w[k] = std::sqrt(s.rho) * rotation.row(a).dot(s.z);
    }
    const Eigen::MatrixXd Ra = w.asDiagonal() * BT;
    out.blocks.push_back(2.0 * Ra.transpose() * Ra + bundle.E);
  }
  return out;
}

double default_eig_tolerance(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return 1e-8 * es.eigenvalues().cwiseAbs().maxCoeff();
}

SpectrumCheck psd_check(const Eigen::MatrixXd& matrix, std::optional<double> tolerance) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("matrix must be square");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");

  SpectrumCheck out;
  out.eigenvalues = es.eigenvalues();
  out.tolerance = tolerance.value_or(1e-8 * out.eigenvalues.cwiseAbs().maxCoeff());
  out.min_eigenvalue = out.eigenvalues.size() ? out.eigenvalues.minCoeff() : 0.0;
  out.psd = !(out.min_eigenvalue < -out.tolerance);
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    if (std::abs(out.eigenvalues[i]) <= out.tolerance) ++out.zero_count;
  }
  return out;
}

}  // namespace flexform
