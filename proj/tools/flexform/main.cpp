// flexform: run scenarios, analyze realizations, build equilibrium catalogs
// and check potential families from the command line.
//
// Exit codes: 0 success, 2 configuration or parse error, 3 numeric failure
// (integration failure, Lyapunov violation, undesired equilibrium without a
// witness, failed assumption check).

#include "flexform/equilibria.hpp"
#include "flexform/scenario.hpp"
#include "flexform/serialize.hpp"
#include "flexform/stability.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace flexform;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kNumeric = 3;

struct Common {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_eig;
  std::optional<double> tol_eq;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Directory for artifacts (stdout when omitted)");
  cmd->add_option("--seed", c.seed, "Seed for randomized perturbation events");
  cmd->add_option("--tol-eig", c.tol_eig, "Absolute zero band for Hessian eigenvalues")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-eq", c.tol_eq, "Balance residual below which a state is an equilibrium")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", c.format, "Trajectory format")
      ->check(CLI::IsMember({"csv", "json"}));
}

AnalysisOptions analysis_options(const Common& c) {
  AnalysisOptions a;
  a.eig_tolerance = c.tol_eig;
  if (c.tol_eq) a.tolerances.equilibrium = *c.tol_eq;
  return a;
}

// Writes `text` to DIR/name, or to stdout when no directory was given.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

struct RunOutcome {
  std::string stem;
  Scenario scenario;
  ScenarioRun run;
};

int report_run(const Common& c, const RunOutcome& r) {
  const Trajectory& t = r.run.trajectory;
  const FormationGraph& g = r.scenario.graph;
  const bool to_files = !c.out.empty();
  if (to_files) {
    if (c.format == "csv") {
      emit(c, r.stem + ".trajectory.csv", trajectory_csv(t, g));
    } else {
      emit(c, r.stem + ".trajectory.json", trajectory_json(t, g));
    }
    emit(c, r.stem + ".events.json", events_json(t));
  }

  int code = kOk;
  for (std::size_t k = 0; k < r.run.reports.size(); ++k) {
    const auto& [time, report] = r.run.reports[k];
    if (to_files) {
      emit(c, r.stem + ".report_" + std::to_string(k + 1) + ".json", report_json(report, g));
    }
    std::cerr << r.stem << ": equilibrium at t=" << time << " classified "
              << to_string(report.classification.kind)
              << (report.classification.subform.empty() ? "" : " (" + report.classification.subform + ")")
              << '\n';
    if (report.missing_witness()) {
      std::cerr << r.stem << ": undesired equilibrium without instability witness: "
                << report.witness_error << '\n';
      code = kNumeric;
    }
  }

  if (!to_files) {
    std::cout << (c.format == "csv" ? trajectory_csv(t, g) : trajectory_json(t, g));
  }
  if (!t.ok()) {
    std::cerr << r.stem << ": integration failed (" << to_string(t.status) << "): " << t.message << '\n';
    code = kNumeric;
  }
  if (!r.run.lyapunov_ok) {
    std::cerr << r.stem << ": Lyapunov check failed in " << t.lyapunov.violations
              << " step(s), max increase " << t.lyapunov.max_increase << " first at t="
              << t.lyapunov.first_violation_time << '\n';
    code = kNumeric;
  }
  if (code == kOk) {
    std::cerr << r.stem << ": ok, t_end=" << t.final_time() << ", " << t.accepted_steps
              << " steps, " << t.events.size() << " event(s)\n";
  }
  return code;
}

int cmd_run(const Common& c, const std::vector<std::string>& files) {
  std::vector<Scenario> scenarios;
  std::vector<std::string> stems;
  for (const auto& f : files) {
    Scenario s = parse_scenario(read_text_file(f), c.seed);
    if (c.tol_eq) s.options.equilibrium_tol = *c.tol_eq;
    scenarios.push_back(std::move(s));
    stems.push_back(fs::path(f).stem().string());
  }
  if (!c.out.empty() && files.size() > 1) {
    for (std::size_t i = 0; i < stems.size(); ++i) {
      for (std::size_t j = i + 1; j < stems.size(); ++j) {
        if (stems[i] == stems[j]) throw ConfigError("duplicate scenario file name " + stems[i]);
      }
    }
  }
  if (c.out.empty() && files.size() > 1) {
    throw ConfigError("--out is required when running more than one scenario");
  }

  // Independent runs share nothing, so they are dispatched concurrently.
  const AnalysisOptions analysis = analysis_options(c);
  std::vector<std::future<ScenarioRun>> jobs;
  for (const auto& s : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&s, &analysis] { return run_scenario(s, analysis); }));
  }
  int code = kOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    RunOutcome r{stems[i], scenarios[i], {}};
    try {
      r.run = jobs[i].get();
    } catch (const std::exception& e) {
      std::cerr << stems[i] << ": " << e.what() << '\n';
      code = std::max(code, kNumeric);
      continue;
    }
    code = std::max(code, report_run(c, r));
  }
  return code;
}

PotentialFamily family_from(const std::string& tag) {
  try {
    return PotentialFamily::from_tag(tag);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

int cmd_analyze(const Common& c, const std::string& realization_file, const std::string& graph_file,
                const std::string& family_tag) {
  const FormationGraph graph = parse_graph(read_text_file(graph_file));
  const Realization p = parse_realization(read_text_file(realization_file));
  try {
    require_compatible(p, graph);
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
  const StabilityReport report = analyze(p, graph, family_from(family_tag), analysis_options(c));
  emit(c, "report.json", report_json(report, graph));
  const auto& cls = report.classification;
  std::cerr << "class " << to_string(cls.kind) << (cls.subform.empty() ? "" : " (" + cls.subform + ")")
            << ", residual " << cls.residual << ", min eigenvalue " << report.spectrum.min_eigenvalue
            << '\n';
  for (const auto& n : cls.notes) std::cerr << "note: " << n << '\n';
  if (report.missing_witness()) {
    std::cerr << "undesired equilibrium without instability witness: " << report.witness_error << '\n';
    return kNumeric;
  }
  return kOk;
}

std::vector<std::string> normalize_labels(const std::vector<std::string>& raw, int dim) {
  std::vector<std::string> out;
  for (const auto& s : raw) {
    if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'h') {
      out.push_back(std::to_string(dim) + s);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

int cmd_catalog(const Common& c, const std::string& graph_file, const std::string& family_tag,
                const std::vector<std::string>& subforms) {
  const FormationGraph graph = parse_graph(read_text_file(graph_file));
  if (!graph.certified()) {
    throw ConfigError("catalog needs the triangle-plus-flex or tetrahedron-plus-flex topology");
  }
  const PotentialFamily family = family_from(family_tag);
  AnalysisOptions analysis = analysis_options(c);
  analysis.verify_lemmas = true;

  const auto labels = normalize_labels(subforms, graph.dimension());
  for (const auto& l : labels) {
    const bool known = l == "QI1" || (l.size() == 2 && l[0] == char('0' + graph.dimension()) &&
                                      l[1] >= 'a' && l[1] <= (graph.dimension() == 2 ? 'c' : 'h'));
    if (!known) throw ConfigError("unknown subform '" + l + "' for this topology");
  }
  const auto attempts = build_catalog(graph, family, labels);
  std::ostringstream lines;
  int undesired = 0;
  int witnessed = 0;
  int constructed = 0;
  int claims = 0;
  int claims_passed = 0;
  for (const auto& a : attempts) {
    if (!a.entry) {
      lines << catalog_line(a, nullptr);
      std::cerr << a.label << ": not constructed: " << a.error << '\n';
      continue;
    }
    ++constructed;
    const StabilityReport r = analyze(a.entry->p, graph, family, analysis);
    lines << catalog_line(a, &r);
    if (r.classification.undesired()) {
      ++undesired;
      if (r.witness) ++witnessed;
    }
    if (r.signs) {
      claims += static_cast<int>(r.signs->claims.size());
      claims_passed += r.signs->passed();
    }
  }
  emit(c, "catalog.jsonl", lines.str());
  std::cerr << "constructed " << constructed << "/" << attempts.size() << ", witnesses " << witnessed
            << "/" << undesired << ", sign claims " << claims_passed << "/" << claims << '\n';
  return witnessed == undesired ? kOk : kNumeric;
}

int cmd_validate(const Common& c, const std::string& family_tag, double dbar, double upper, int count) {
  if (!(dbar > 0.0)) throw ConfigError("--dbar must be positive");
  const PotentialFamily family = family_from(family_tag);
  const auto grid = sample_grid(dbar, upper > 0.0 ? upper : 4.0 * dbar * dbar, count);
  const auto violations = validate_assumption1(family, dbar, grid);
  emit(c, "potential.json", assumption_json(family, dbar, grid, violations));
  return violations.empty() ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based formation control with a flex agent"};
  app.require_subcommand(1);

  Common common;

  std::vector<std::string> scenario_files;
  auto* run = app.add_subcommand("run", "Integrate one or more scenario files");
  run->add_option("scenario", scenario_files, "Scenario JSON file(s)")->required()->check(CLI::ExistingFile);
  add_common(run, common);

  std::string realization_file, graph_file, family_tag = "quadratic";
  auto* an = app.add_subcommand("analyze", "Classify a realization and certify its stability");
  an->add_option("realization", realization_file, "Realization JSON")->required()->check(CLI::ExistingFile);
  an->add_option("graph", graph_file, "Graph JSON")->required()->check(CLI::ExistingFile);
  an->add_option("--family", family_tag, "Potential family")->check(CLI::IsMember({"quadratic", "rational"}));
  add_common(an, common);

  std::vector<std::string> subforms;
  auto* cat = app.add_subcommand("catalog", "Construct and certify undesired equilibria");
  cat->add_option("graph", graph_file, "Graph JSON")->required()->check(CLI::ExistingFile);
  cat->add_option("--family", family_tag, "Potential family")->check(CLI::IsMember({"quadratic", "rational"}));
  cat->add_option("--subforms", subforms, "Subforms to build (e.g. a,b,c or 3a,QI1); all when omitted")
      ->delimiter(',');
  add_common(cat, common);

  double dbar = 1.0;
  double upper = 0.0;
  int count = 2001;
  auto* vp = app.add_subcommand("validate-potential", "Check a potential family's assumptions on a grid");
  vp->add_option("--family", family_tag, "Potential family")->check(CLI::IsMember({"quadratic", "rational"}));
  vp->add_option("--dbar", dbar, "Desired distance");
  vp->add_option("--upper", upper, "Largest squared-distance error sampled (default 4 dbar^2)");
  vp->add_option("--count", count, "Grid size")->check(CLI::Range(3, 10000000));
  add_common(vp, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(common, scenario_files);
    if (*an) return cmd_analyze(common, realization_file, graph_file, family_tag);
    if (*cat) return cmd_catalog(common, graph_file, family_tag, subforms);
    if (*vp) return cmd_validate(common, family_tag, dbar, upper, count);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const GraphError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kConfig;
}
