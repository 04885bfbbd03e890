#include "flexform/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace flexform {

using nlohmann::json;

namespace {

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("invalid JSON: ") + err.what());
  }
}

template <typename Fn>
auto wrap(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& err) {
    throw ConfigError(std::string(what) + ": " + err.what());
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string(what) + ": " + err.what());
  } catch (const std::out_of_range& err) {
    throw ConfigError(std::string(what) + ": " + err.what());
  }
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(std::string("missing required field '") + key + "'");
  }
  return obj.at(key);
}

Eigen::VectorXd vector_of(const json& arr) {
  if (!arr.is_array()) throw ConfigError("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k) v[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
  return v;
}

FormationGraph graph_from(const json& g) {
  const int dim = require(g, "dimension").get<int>();
  const int nodes = require(g, "nodes").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : require(g, "edges")) {
    if (!e.is_array() || e.size() != 3) throw ConfigError("each edge must be [i, j, dbar]");
    edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1, e[2].get<double>()});
  }
  const auto& f = require(g, "flex_edge");
  if (!f.is_array() || f.size() != 2) throw ConfigError("flex_edge must be [i, j]");
  return FormationGraph(nodes, dim, std::move(edges), {f[0].get<int>() - 1, f[1].get<int>() - 1});
}

Realization realization_from(const json& j) {
  const json& pts = j.is_object() ? require(j, "positions") : j;
  if (!pts.is_array() || pts.empty()) throw ConfigError("positions must be a non-empty array");
  std::vector<std::vector<double>> rows;
  for (const auto& row : pts) rows.push_back(row.get<std::vector<double>>());
  return Realization::from_points(rows);
}

StepControl step_from(const json& j) {
  StepControl s;
  if (j.is_number()) {
    s.dt = j.get<double>();
    return s;
  }
  const std::string mode = j.value("mode", "fixed");
  if (mode == "fixed") {
    s.mode = StepMode::Fixed;
  } else if (mode == "adaptive") {
    s.mode = StepMode::Adaptive;
  } else {
    throw ConfigError("step mode must be 'fixed' or 'adaptive'");
  }
  s.dt = j.value("dt", s.dt);
  s.rtol = j.value("rtol", s.rtol);
  s.atol = j.value("atol", s.atol);
  s.min_dt = j.value("min_dt", s.min_dt);
  s.max_dt = j.value("max_dt", s.max_dt);
  return s;
}

PerturbationEvent event_from(const json& e, int dim, std::optional<std::uint64_t> seed) {
  const double time = require(e, "time").get<double>();
  const int agent = require(e, "agent").get<int>() - 1;
  if (e.contains("displacement")) {
    return {time, agent, vector_of(e.at("displacement"))};
  }
  if (e.contains("magnitude")) {
    const std::uint64_t s = e.contains("seed") ? e.at("seed").get<std::uint64_t>() : seed.value_or(0);
    return PerturbationEvent::seeded(time, agent, dim, e.at("magnitude").get<double>(), s);
  }
  throw ConfigError("perturbation event needs 'displacement' or 'magnitude'");
}

LeaderSpec leader_from(const json& j, int dim) {
  const std::string mode = require(j, "mode").get<std::string>();
  if (mode == "none") return LeaderSpec::none();
  if (mode == "target") {
    return LeaderSpec::target(require(j, "k_f").get<double>(), vector_of(require(j, "p_t")));
  }
  if (mode == "windowed") {
    const double t0 = require(j, "t0").get<double>();
    const double tf = require(j, "Tf").get<double>();
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    for (const auto& row : require(j, "v")) {
      const Eigen::VectorXd r = vector_of(row);
      if (r.size() != dim + 1) throw ConfigError("each windowed sample must be [t, v_1, ..., v_d]");
      times.push_back(r[0]);
      values.push_back(r.tail(dim));
    }
    return LeaderSpec::piecewise(t0, tf, std::move(times), std::move(values));
  }
  throw ConfigError("leader mode must be 'none', 'target' or 'windowed'");
}

}  // namespace

FormationGraph parse_graph(std::string_view text) {
  const json doc = parse_document(text);
  return wrap("graph", [&] { return graph_from(doc); });
}

Realization parse_realization(std::string_view text) {
  const json doc = parse_document(text);
  return wrap("realization", [&] { return realization_from(doc); });
}

Scenario parse_scenario(std::string_view text, std::optional<std::uint64_t> seed) {
  const json doc = parse_document(text);
  return wrap("scenario", [&] {
    FormationGraph graph = graph_from(require(doc, "graph"));
    const std::string tag = doc.value("potential", "quadratic");
    PotentialFamily family = PotentialFamily::from_tag(tag);
    Realization initial = realization_from(require(doc, "initial"));
    require_compatible(initial, graph);

    IntegrationOptions opt;
    opt.t_end = require(doc, "t_end").get<double>();
    if (doc.contains("step")) opt.step = step_from(doc.at("step"));
    opt.equilibrium_tol = doc.value("equilibrium_tol", opt.equilibrium_tol);
    opt.target_tol = doc.value("target_tol", opt.target_tol);
    opt.record_stride = doc.value("record_stride", opt.record_stride);
    opt.lyapunov_tol = doc.value("lyapunov_tol", opt.lyapunov_tol);
    if (doc.contains("events")) {
      for (const auto& e : doc.at("events")) {
        opt.perturbations.push_back(event_from(e, graph.dimension(), seed));
      }
    }

    LeaderSpec leader;
    if (doc.contains("leader")) leader = leader_from(doc.at("leader"), graph.dimension());
    leader.validate(graph.dimension());

    AnalysisFlags flags;
    if (doc.contains("analysis")) {
      const auto& a = doc.at("analysis");
      flags.hessian_at_equilibria = a.value("hessian_at_equilibria", false);
      flags.catalog = a.value("catalog", false);
      flags.lemma_verify = a.value("lemma_verify", false);
    }
    return Scenario{doc.value("name", std::string()), std::move(graph), tag, std::move(family),
                    std::move(initial), std::move(opt), std::move(leader), flags};
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioRun run_scenario(const Scenario& s, const AnalysisOptions& analysis) {
  ScenarioRun out;
  const ClosedLoop system{s.graph, s.family, s.leader};
  out.trajectory = integrate(s.initial, system, s.options);
  out.lyapunov_ok = out.trajectory.lyapunov.violations == 0;

  if (s.analysis.hessian_at_equilibria) {
    AnalysisOptions opts = analysis;
    opts.verify_lemmas = s.analysis.lemma_verify;
    for (const auto& ev : out.trajectory.events) {
      if (ev.kind != EventKind::EquilibriumDetected) continue;
      const auto& times = out.trajectory.times;
      const auto it = std::lower_bound(times.begin(), times.end(), ev.time);
      if (it == times.end()) continue;
      const auto idx = static_cast<std::size_t>(it - times.begin());
      out.reports.emplace_back(ev.time, analyze(out.trajectory.states[idx], s.graph, s.family, opts));
    }
  }
  return out;
}

}  // namespace flexform
