#include "flexform/stability.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace flexform {

std::string to_string(WitnessKind kind) {
  switch (kind) {
    case WitnessKind::FlexSum: return "flex-sum";
    case WitnessKind::AgentIndicator: return "agent-indicator";
    case WitnessKind::EigenvectorFallback: return "eigenvector-fallback";
  }
  return "unknown";
}

namespace {

double spectral_norm(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

InstabilityWitness instability_witness(const Realization& p, const FormationGraph& graph,
                                       const EquilibriumClass& cls, const HessianBundle& bundle) {
  require_compatible(p, graph);
  if (!cls.undesired()) {
    throw std::invalid_argument("instability witness requested for a point classified " +
                                to_string(cls.kind));
  }
  const int d = graph.dimension();
  const int n = graph.num_nodes();
  const int axis = d - 1;
  const double threshold = 1e-10 * spectral_norm(bundle.H);

  const Eigen::MatrixXd frame = alignment_frame(p, graph);
  const CoordinateBlocks blocks = coordinate_blocks(bundle, frame);
  const Eigen::MatrixXd& Hb = blocks.blocks[static_cast<std::size_t>(axis)];

  const auto make = [&](WitnessKind kind, int agent, const Eigen::VectorXd& v) {
    InstabilityWitness w;
    w.kind = kind;
    w.agent = agent;
    w.axis = axis;
    w.frame = frame;
    w.block_vector = v;
    w.form = v.dot(Hb * v);
    w.full_vector = Eigen::VectorXd::Zero(n * d);
    for (int a = 0; a < n; ++a) w.full_vector.segment(a * d, d) = v[a] * frame.row(axis).transpose();
    w.full_form = w.full_vector.dot(bundle.H * w.full_vector);
    w.threshold = threshold;
    return w;
  };
  const auto negative = [&](double form) { return form < -threshold; };

  if (cls.kind == EquilibriumKind::UndesiredQI1) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    v[graph.flex_node()] = 0.0;
    auto w = make(WitnessKind::FlexSum, -1, v);
    if (negative(w.form)) return w;
  }
  for (int a = 0; a < n; ++a) {
    auto w = make(WitnessKind::AgentIndicator, a, Eigen::VectorXd::Unit(n, a));
    if (negative(w.form)) return w;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> block_es(Hb);
  if (block_es.info() == Eigen::Success) {
    auto w = make(WitnessKind::EigenvectorFallback, -1, block_es.eigenvectors().col(0));
    if (negative(w.form)) return w;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full_es(bundle.H);
  if (full_es.info() == Eigen::Success && negative(full_es.eigenvalues()[0])) {
    InstabilityWitness w;
    w.kind = WitnessKind::EigenvectorFallback;
    w.axis = -1;
    w.frame = Eigen::MatrixXd::Identity(d, d);
    w.full_vector = full_es.eigenvectors().col(0);
    w.form = w.full_vector.dot(bundle.H * w.full_vector);
    w.full_form = w.form;
    w.threshold = threshold;
    return w;
  }

  std::ostringstream os;
  os << "no direction of negative curvature below -" << threshold << " for a point classified "
     << to_string(cls.kind);
  if (!cls.subform.empty()) os << " (" << cls.subform << ")";
  throw NoWitnessError(os.str());
}

StabilityReport analyze(const Realization& p, const FormationGraph& graph,
                        const PotentialFamily& family, const AnalysisOptions& options) {
  StabilityReport rep;
  rep.bundle = assemble_hessian(p, graph, family);
  rep.spectrum = psd_check(rep.bundle.H, options.eig_tolerance);
  rep.classification = classify(p, graph, family, options.tolerances);
  rep.certified = graph.certified();
  rep.frame = alignment_frame(p, graph, options.tolerances.geometry);
  const auto blocks = coordinate_blocks(rep.bundle, rep.frame);
  const auto& last = blocks.blocks.back();
  rep.block_spectrum = psd_check(0.5 * (last + last.transpose()), options.eig_tolerance);

  if (rep.classification.undesired()) {
    try {
      rep.witness = instability_witness(p, graph, rep.classification, rep.bundle);
    } catch (const NoWitnessError& err) {
      rep.witness_error = err.what();
    }
  }
  if (options.verify_lemmas && rep.classification.kind == EquilibriumKind::UndesiredQI2 &&
      !rep.classification.subform.empty()) {
    rep.signs = verify_sign_properties(p, graph, family, rep.classification);
  }
  return rep;
}

}  // namespace flexform
