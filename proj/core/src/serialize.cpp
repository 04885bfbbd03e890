#include "flexform/serialize.hpp"

#include "json.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace flexform {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number(v[k]));
  return a;
}

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

json points(const Realization& p) {
  json a = json::array();
  for (int i = 0; i < p.num_agents(); ++i) a.push_back(vec(p.agent(i)));
  return a;
}

json spectrum(const SpectrumCheck& s) {
  return {{"eigenvalues", vec(s.eigenvalues)},
          {"min_eigenvalue", number(s.min_eigenvalue)},
          {"tolerance", number(s.tolerance)},
          {"psd", s.psd},
          {"zero_count", s.zero_count}};
}

json one_based(const std::vector<int>& v) {
  json a = json::array();
  for (int x : v) a.push_back(x + 1);
  return a;
}

json classification(const EquilibriumClass& c) {
  return {{"class", to_string(c.kind)},
          {"subform", c.subform},
          {"subform_name", c.subform_name},
          {"roles", one_based(c.roles)},
          {"residual", number(c.residual)},
          {"max_shape_error", number(c.max_shape_error)},
          {"flex_length", number(c.flex_length)},
          {"flatness", number(c.flatness)},
          {"notes", c.notes}};
}

json witness(const InstabilityWitness& w) {
  return {{"kind", to_string(w.kind)},
          {"agent", w.agent >= 0 ? json(w.agent + 1) : json(nullptr)},
          {"axis", w.axis},
          {"frame", mat(w.frame)},
          {"block_vector", vec(w.block_vector)},
          {"vector", vec(w.full_vector)},
          {"quadratic_form", number(w.form)},
          {"full_quadratic_form", number(w.full_form)},
          {"threshold", number(w.threshold)}};
}

std::string to_string(SignRelation r) {
  switch (r) {
    case SignRelation::Negative: return "negative";
    case SignRelation::Positive: return "positive";
    case SignRelation::Zero: return "zero";
  }
  return "unknown";
}

json signs(const SignReport& s) {
  json claims = json::array();
  for (const auto& c : s.claims) {
    claims.push_back({{"claim", c.statement},
                      {"relation", to_string(c.relation)},
                      {"value", number(c.value)},
                      {"margin", number(c.margin)},
                      {"pass", c.pass}});
  }
  return {{"subform", s.subform},
          {"roles", one_based(s.roles)},
          {"zero_band", s.zero_band},
          {"passed", s.passed()},
          {"total", static_cast<int>(s.claims.size())},
          {"claims", claims}};
}

json report(const StabilityReport& r, const FormationGraph& graph) {
  json edges = json::array();
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edge(k);
    const auto& s = r.bundle.edges[static_cast<std::size_t>(k)];
    edges.push_back({{"edge", {e.first + 1, e.second + 1}},
                     {"error", number(s.error)},
                     {"g", number(s.g)},
                     {"rho", number(s.rho)}});
  }
  json out = {{"classification", classification(r.classification)},
              {"certified_topology", r.certified},
              {"edges", edges},
              {"spectrum", spectrum(r.spectrum)},
              {"frame", mat(r.frame)},
              {"block_spectrum", spectrum(r.block_spectrum)},
              {"witness", r.witness ? witness(*r.witness) : json(nullptr)},
              {"lemma_table", r.signs ? signs(*r.signs) : json(nullptr)}};
  if (!r.witness_error.empty()) out["witness_error"] = r.witness_error;
  return out;
}

std::string edge_label(const Edge& e) {
  return "e_" + std::to_string(e.first + 1) + std::to_string(e.second + 1);
}

}  // namespace

std::string trajectory_csv(const Trajectory& t, const FormationGraph& graph) {
  static constexpr const char* kAxes = "xyz";
  std::ostringstream os;
  os << std::setprecision(12);
  os << "t";
  for (int i = 0; i < graph.num_nodes(); ++i) {
    for (int a = 0; a < graph.dimension(); ++a) os << ',' << kAxes[a] << i + 1;
  }
  for (const auto& e : graph.edges()) os << ',' << edge_label(e);
  os << ",gradnorm\n";
  for (std::size_t r = 0; r < t.times.size(); ++r) {
    os << t.times[r];
    const auto& p = t.states[r].stacked();
    for (Eigen::Index k = 0; k < p.size(); ++k) os << ',' << p[k];
    const auto& e = t.edge_errors[r];
    for (Eigen::Index k = 0; k < e.size(); ++k) os << ',' << e[k];
    os << ',' << t.gradient_norms[r] << '\n';
  }
  return os.str();
}

std::string events_json(const Trajectory& t) {
  json events = json::array();
  for (const auto& e : t.events) {
    json item = {{"time", e.time}, {"kind", to_string(e.kind)}, {"value", number(e.value)}};
    if (e.agent >= 0) item["agent"] = e.agent + 1;
    events.push_back(item);
  }
  const auto& l = t.lyapunov;
  json doc = {{"status", to_string(t.status)},
              {"message", t.message},
              {"accepted_steps", t.accepted_steps},
              {"final_time", t.times.empty() ? json(nullptr) : json(t.times.back())},
              {"events", events},
              {"lyapunov",
               {{"checked_steps", l.steps},
                {"violations", l.violations},
                {"max_increase", number(l.max_increase)},
                {"first_violation_time", number(l.first_violation_time)}}}};
  return doc.dump(2) + "\n";
}

std::string trajectory_json(const Trajectory& t, const FormationGraph& graph) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.times.size(); ++r) {
    rows.push_back({{"t", t.times[r]},
                    {"positions", points(t.states[r])},
                    {"errors", vec(t.edge_errors[r])},
                    {"gradnorm", number(t.gradient_norms[r])}});
  }
  json labels = json::array();
  for (const auto& e : graph.edges()) labels.push_back(edge_label(e));
  json doc = {{"edges", labels}, {"samples", rows}, {"run", json::parse(events_json(t))}};
  return doc.dump(2) + "\n";
}

std::string realization_json(const Realization& p) {
  return json({{"positions", points(p)}}).dump(2) + "\n";
}

std::string report_json(const StabilityReport& r, const FormationGraph& graph) {
  return report(r, graph).dump(2) + "\n";
}

std::string catalog_line(const CatalogAttempt& a, const StabilityReport* r) {
  json line = {{"label", a.label}};
  if (!a.entry) {
    line["status"] = "not_constructed";
    line["error"] = a.error;
    return line.dump() + "\n";
  }
  const auto& e = *a.entry;
  line["status"] = "ok";
  line["positions"] = points(e.p);
  line["class"] = to_string(e.classification.kind);
  line["subform"] = e.classification.subform;
  line["roles"] = one_based(e.classification.roles);
  line["residual"] = number(e.residual);
  line["method"] = to_string(e.method);
  if (!e.notes.empty()) line["notes"] = e.notes;
  if (r) {
    line["min_eigenvalue"] = number(r->spectrum.min_eigenvalue);
    line["witness"] = r->witness ? witness(*r->witness) : json(nullptr);
    if (!r->witness_error.empty()) line["witness_error"] = r->witness_error;
    line["lemma_table"] = r->signs ? signs(*r->signs) : json(nullptr);
  }
  return line.dump() + "\n";
}

std::string assumption_json(const PotentialFamily& family, double dbar,
                            const std::vector<double>& grid,
                            const std::vector<AssumptionViolation>& violations) {
  json v = json::array();
  for (const auto& x : violations) {
    v.push_back({{"check", std::string(to_string(x.check))}, {"e", x.e}, {"value", number(x.value)}});
  }
  json doc = {{"family", family.name()},
              {"dbar", dbar},
              {"grid_points", grid.size()},
              {"grid_min", grid.empty() ? json(nullptr) : json(grid.front())},
              {"grid_max", grid.empty() ? json(nullptr) : json(grid.back())},
              {"pass", violations.empty()},
              {"violations", v},
              {"note", "analyticity near e = 0 is not checked from samples"}};
  return doc.dump(2) + "\n";
}

}  // namespace flexform
