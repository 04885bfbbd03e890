#pragma once

#include "flexform/classify.hpp"
#include "flexform/graph.hpp"
#include "flexform/hessian.hpp"
#include "flexform/lemmas.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace flexform {

/// No direction of negative curvature was found at a point that was expected
/// to be an unstable equilibrium.
class NoWitnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WitnessKind { FlexSum, AgentIndicator, EigenvectorFallback };

std::string to_string(WitnessKind kind);

struct InstabilityWitness {
  WitnessKind kind = WitnessKind::FlexSum;
  int agent = -1;  // indicator agent, zero-based
  int axis = 0;    // axis of the frame whose block carries the vector
  Eigen::MatrixXd frame;
  Eigen::VectorXd block_vector;  // one entry per agent
  Eigen::VectorXd full_vector;   // the same direction in original coordinates
  double form = 0.0;             // block_vector^T H_aa block_vector
  double full_form = 0.0;        // full_vector^T H_V full_vector
  double threshold = 0.0;        // forms must lie below -threshold
};

/// Negative-curvature certificate for an undesired equilibrium. Candidates,
/// first strictly negative wins: the all-ones vector without the flex agent,
/// agent indicators in index order (in the alignment frame, last axis), the
/// eigenvector of the block's most negative eigenvalue, and finally that of
/// H_V itself. "Strictly negative" means below -1e-10 * |H_V|. Throws
/// NoWitnessError when none qualifies.
InstabilityWitness instability_witness(const Realization& p, const FormationGraph& graph,
                                       const EquilibriumClass& cls, const HessianBundle& bundle);

struct AnalysisOptions {
  ClassifyTolerances tolerances;
  std::optional<double> eig_tolerance;  // default 1e-8 * |H_V|
  bool verify_lemmas = true;
};

struct StabilityReport {
  HessianBundle bundle;
  SpectrumCheck spectrum;        // of H_V
  Eigen::MatrixXd frame;         // alignment frame used for the block
  SpectrumCheck block_spectrum;  // of H_22 (2-D) or H_33 (3-D) in that frame
  EquilibriumClass classification;
  std::optional<InstabilityWitness> witness;
  std::string witness_error;
  std::optional<SignReport> signs;
  /// True when the graph is one of the two certified topologies.
  bool certified = false;

  /// Undesired and uncertified by a witness: a contract violation.
  bool missing_witness() const { return classification.undesired() && !witness; }
};

StabilityReport analyze(const Realization& p, const FormationGraph& graph,
                        const PotentialFamily& family, const AnalysisOptions& options = {});

}  // namespace flexform
