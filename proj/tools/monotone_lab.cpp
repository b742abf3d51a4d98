// monotone-lab: runs scenario files, or builds a one-task scenario from flags.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "monolab/harness.hpp"

namespace {

using ojson = nlohmann::ordered_json;

struct Common {
  std::uint64_t seed = 1;
  std::optional<int> budget;
  std::optional<double> eta;
  std::string out;
  std::string format = "json";
  bool timings = false;
  int dim = 1;
  std::string norm = "L2";
};

void add_output(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Write the report here instead of stdout");
  cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--timings", c.timings, "Include per-task wall times in JSON output");
}

void add_space(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Task seed");
  cmd->add_option("--dim", c.dim, "Space dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--norm", c.norm, "Primal norm")->check(CLI::IsMember({"L1", "L2", "LInf"}));
}

ojson descriptor(const std::string& text, const char* flag) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error&) {
    throw monolab::ScenarioError(flag, "descriptor is not valid JSON");
  }
}

ojson vec_json(const std::vector<double>& v) {
  if (v.size() == 1) return v[0];
  return ojson(v);
}

ojson scenario(const Common& c, ojson task) {
  ojson doc;
  doc["schema"] = 1;
  doc["space"] = {{"dim", c.dim}, {"norm", c.norm}};
  task["seed"] = c.seed;
  doc["tasks"] = ojson::array({std::move(task)});
  return doc;
}

void emit(const monolab::Report& rep, const Common& c) {
  const std::string body = c.format == "csv" ? rep.to_csv() : rep.to_json(c.timings);
  if (c.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw monolab::ScenarioError(c.out, "cannot open output file");
  f << body;
  for (std::size_t i = 0; i < rep.tasks.size(); ++i) {
    const auto& t = rep.tasks[i];
    std::cerr << "task " << i << " (" << t.type << "): " << (t.ok ? "ok" : "failed: " + t.error) << ", "
              << t.records << " records\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for monotone operators on finite-dimensional dual pairs"};
  app.require_subcommand(1);
  Common c;

  std::string scenario_path;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Override every task seed");
  run->add_option("--budget", c.budget, "Override task budgets where a task takes one");
  run->add_option("--eta", c.eta, "Override gap and sum_test tolerances");
  add_output(run, c);

  std::string op_text, fn_text, window_text, set_text, cls, mode, side;
  std::vector<double> x, xstar, w, wstar, wstarstar, u;
  int probes = 0;
  double alpha = 1.0, beta = 1.0, eps = 1e-6;

  auto* gap = app.add_subcommand("gap", "Quasidensity gap at points or seeded probes");
  add_space(gap, c);
  gap->add_option("--operator", op_text, "Operator descriptor (JSON)")->required();
  gap->add_option("--x", x, "Probe x (comma separated)")->delimiter(',');
  gap->add_option("--xstar", xstar, "Probe x* (comma separated)")->delimiter(',');
  gap->add_option("--probes", probes, "Number of seeded probes when no point is given");
  gap->add_option("--eta", c.eta, "Pass threshold");
  gap->add_option("--budget", c.budget, "Graph samples seeding the search");
  add_output(gap, c);

  auto* fitz = app.add_subcommand("fitz", "Fitzpatrick function and extension membership");
  add_space(fitz, c);
  fitz->add_option("--operator", op_text, "Operator descriptor (JSON)")->required();
  fitz->add_option("--x", x, "Point x")->delimiter(',');
  fitz->add_option("--xstar", xstar, "Point x*")->delimiter(',');
  fitz->add_option("--probes", probes, "Number of seeded probes when no point is given");
  fitz->add_option("--budget", c.budget, "Graph samples for sampled sups");
  add_output(fitz, c);

  auto* classify = app.add_subcommand("classify", "FPV, FP, NI and strong maximality checks");
  add_space(classify, c);
  classify->add_option("--class", cls, "Check to run")
      ->required()
      ->check(CLI::IsMember({"fpv", "fp", "ni", "strongmax"}));
  classify->add_option("--operator", op_text, "Operator descriptor (JSON)")->required();
  classify->add_option("--window", window_text, "Window descriptor for fpv/fp (JSON)");
  classify->add_option("--set", set_text, "Set descriptor for strongmax (JSON)");
  classify->add_option("--side", side, "strongmax side")->check(CLI::IsMember({"dual", "primal"}));
  classify->add_option("--w", w, "w")->delimiter(',');
  classify->add_option("--wstar", wstar, "w*")->delimiter(',');
  classify->add_option("--wstarstar", wstarstar, "w** (ni)")->delimiter(',');
  classify->add_option("--budget", c.budget, "Graph samples");
  add_output(classify, c);

  auto* br = app.add_subcommand("br", "Broendsted-Rockafellar points and quasidense witnesses");
  add_space(br, c);
  br->add_option("--mode", mode, "Procedure")->required()->check(CLI::IsMember({"point", "corollary", "van", "witness"}));
  br->add_option("--function", fn_text, "Function descriptor (JSON)")->required();
  br->add_option("--u", u, "Start point (point mode)")->delimiter(',');
  br->add_option("--alpha", alpha, "Distance bound (point mode)");
  br->add_option("--beta", beta, "Slope bound");
  br->add_option("--eps", eps, "Target for van/witness");
  br->add_option("--x", x, "Target x (witness mode)")->delimiter(',');
  br->add_option("--xstar", xstar, "Target x* (witness mode)")->delimiter(',');
  add_output(br, c);

  std::vector<int> ns{1, 2, 4, 8, 16};
  std::optional<double> probe_x, probe_xstar;
  auto* tail = app.add_subcommand("tail", "Gap bounds of the truncated tail operator per n");
  tail->add_option("--seed", c.seed, "Seed");
  tail->add_option("--n", ns, "Sizes (comma separated)")->delimiter(',');
  tail->add_option("--probe-x", probe_x, "Constant entry of the probe x (default 0)");
  tail->add_option("--probe-xstar", probe_xstar, "Constant entry of the probe x* (default 1)");
  add_output(tail, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    monolab::Report rep;
    if (run->parsed()) {
      std::ifstream in(scenario_path, std::ios::binary);
      ojson doc;
      try {
        doc = ojson::parse(in);
      } catch (const ojson::parse_error&) {
        // Re-parse through the library for the line:column message.
        rep = monolab::run_scenario(scenario_path);
      }
      if (doc.is_object() && doc.contains("tasks") && doc["tasks"].is_array()) {
        for (auto& t : doc["tasks"]) {
          if (!t.is_object()) continue;
          const std::string type = t.value("type", "");
          if (run_seed) t["seed"] = *run_seed;
          const bool budgeted = type == "gap" || type == "fitz" || type == "sum_test" ||
                                (type == "classify" && t.value("class", "") != "seqchar");
          if (c.budget && budgeted) {
            t["budget"] = *c.budget;
          }
          if (c.eta && (type == "gap" || type == "sum_test")) t["eta"] = *c.eta;
        }
      }
      rep = monolab::run_scenario_text(doc.dump());
    } else if (gap->parsed() || fitz->parsed()) {
      ojson task{{"type", gap->parsed() ? "gap" : "fitz"}, {"operator", descriptor(op_text, "--operator")}};
      if (!x.empty() || !xstar.empty()) {
        task["points"] = ojson::array({{{"x", vec_json(x)}, {"xstar", vec_json(xstar)}}});
      } else {
        task["probes"] = probes > 0 ? probes : 20;
      }
      if (c.budget) task["budget"] = *c.budget;
      if (c.eta && gap->parsed()) task["eta"] = *c.eta;
      rep = monolab::run_scenario_text(scenario(c, std::move(task)).dump());
    } else if (classify->parsed()) {
      ojson task{{"type", "classify"}, {"class", cls}, {"operator", descriptor(op_text, "--operator")}};
      if (!window_text.empty()) task["window"] = descriptor(window_text, "--window");
      if (!set_text.empty()) task["set"] = descriptor(set_text, "--set");
      if (!side.empty()) task["side"] = side;
      if (!w.empty()) task["w"] = vec_json(w);
      if (!wstar.empty()) task["wstar"] = vec_json(wstar);
      if (!wstarstar.empty()) task["wstarstar"] = vec_json(wstarstar);
      if (c.budget) task["budget"] = *c.budget;
      rep = monolab::run_scenario_text(scenario(c, std::move(task)).dump());
    } else if (br->parsed()) {
      ojson task{{"type", "br"}, {"mode", mode}, {"function", descriptor(fn_text, "--function")}};
      if (mode == "point") {
        task["u"] = vec_json(u);
        task["alpha"] = alpha;
        task["beta"] = beta;
      } else if (mode == "corollary") {
        task["beta"] = beta;
      } else {
        task["eps"] = eps;
        if (mode == "witness") {
          task["x"] = vec_json(x);
          task["xstar"] = vec_json(xstar);
        }
      }
      rep = monolab::run_scenario_text(scenario(c, std::move(task)).dump());
    } else if (tail->parsed()) {
      ojson task{{"type", "tail_experiment"}, {"n", ns}};
      if (probe_x || probe_xstar) task["probe"] = {{"x", probe_x.value_or(0.0)}, {"xstar", probe_xstar.value_or(1.0)}};
      rep = monolab::run_scenario_text(scenario(c, std::move(task)).dump());
    }
    emit(rep, c);
    return 0;
  } catch (const monolab::ScenarioError& e) {
    std::cerr << "monotone-lab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "monotone-lab: internal error: " << e.what() << "\n";
    return 3;
  } catch (...) {
    std::cerr << "monotone-lab: internal error\n";
    return 3;
  }
}
