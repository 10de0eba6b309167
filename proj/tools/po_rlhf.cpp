// po-rlhf: command-line front end for the partial-observability RLHF toolkit.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "porlhf/experiments.hpp"
#include "porlhf/identifiability.hpp"
#include "porlhf/scenario_io.hpp"

using namespace porlhf;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("PO_RLHF_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("PO_RLHF_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

// Scenario reference plus parameter overrides shared by several subcommands.
struct ScenarioArgs {
  std::string ref;
  std::map<std::string, double> named;
  std::vector<std::string> extra;  // key=value

  void add(CLI::App* cmd) {
    cmd->add_option("scenario", ref, "scenario file or name (example_a, example_b, chain, catalog names)")->required();
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"--p", "p"}, {"--r", "r"}, {"--p-hide", "p_hide"}, {"--p-default", "p_default"}, {"--p-w", "p_w"},
        {"--b", "b"}, {"--eps", "eps"}, {"--variant", "variant"}, {"--gamma", "gamma"}};
    for (const auto& [flag, key] : flags) {
      const std::string k = key;
      cmd->add_option_function<double>(flag, [this, k](const double& v) { named[k] = v; }, "scenario parameter " + k);
    }
    cmd->add_option("--param", extra, "extra scenario parameter key=value (repeatable)");
  }

  Scenario load() const {
    std::map<std::string, double> ov = named;
    for (const std::string& kv : extra) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
      try {
        ov[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("--param value is not a number: '" + kv + "'");
      }
    }
    try {
      return load_scenario_ref(ref, ov);
    } catch (const ScenarioParseError& e) {
      throw UsageError(e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

std::vector<double> parse_grid(const std::string& grid) {
  std::vector<double> out;
  if (grid.empty()) return out;
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad grid value '" + s + "' in '" + grid + "'");
    }
  };
  if (grid.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(grid);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("range grid must be start:stop:step, got '" + grid + "'");
    const double a = num(parts[0]), b = num(parts[1]), step = num(parts[2]);
    if (!(step > 0)) throw UsageError("grid step must be positive");
    const long n = std::lround(std::floor((b - a) / step + 1e-9)) + 1;
    for (long k = 0; k < n; ++k) out.push_back(std::round((a + k * step) * 1e12) / 1e12);
    return out;
  }
  std::stringstream ss(grid);
  for (std::string p; std::getline(ss, p, ',');)
    if (!p.empty()) out.push_back(num(p));
  return out;
}

void print_vector_table(std::ostream& os, const std::vector<std::string>& labels, const Mat& basis, const std::string& indent) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    os << indent << std::left << std::setw(16) << labels[i];
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
      const double v = std::fabs(basis(i, k)) < 1e-13 ? 0.0 : basis(i, k);
      os << ' ' << std::setw(20) << v;
    }
    os << '\n';
  }
}

const char* tick(bool b) { return b ? "✓" : "✗"; }

int cmd_ambiguity(const ScenarioArgs& sa, double tol, bool exact) {
  const Scenario s = sa.load();
  const AmbiguitySubspace a = ambiguity(s.belief, s.gamma, tol);
  const LadderReport l = identifiability_ladder(s.belief, s.gamma, &s.theta, tol);
  std::cout << "scenario " << s.name << ": " << s.sequences.size() << " state sequences, " << s.space.size()
            << " observation sequences\n";
  std::cout << "ker B: dim " << a.ker_b_dim << '\n';
  std::cout << "im Gamma: dim " << a.im_gamma_dim << '\n';
  std::cout << "ker Gamma: dim " << a.ker_gamma_dim << '\n';
  std::cout << "ker B ∩ im Gamma: dim " << a.return_dim << '\n';
  std::cout << "ker(B Gamma): dim " << a.reward_dim << '\n';
  std::cout << "ladder: ker B trivial " << tick(l.ker_b_trivial) << ", ker(B Gamma) trivial " << tick(l.ker_b_gamma_trivial)
            << ", ker B ∩ im Gamma trivial " << tick(l.intersection_trivial);
  if (l.theta_kron_checked) std::cout << ", Theta⊗Theta injective " << tick(l.theta_kron_injective);
  std::cout << '\n';
  if (exact) {
    const ExactDims d = exact_ambiguity_dims(s.belief, s.gamma);
    std::cout << "exact: ker B dim " << d.ker_b << ", im Gamma dim " << d.im_gamma << ", return ambiguity dim "
              << d.return_ambiguity << ", reward ambiguity dim " << d.reward_ambiguity << '\n';
    if (d.return_ambiguity != a.return_dim || d.reward_ambiguity != a.reward_dim)
      std::cout << "warning: exact and floating-point dimensions differ\n";
  }
  std::cout << "return ambiguity: dim " << a.return_dim << "; " << l.verdict << '\n';
  if (a.return_dim > 0) {
    std::vector<std::string> seqs;
    for (std::size_t i = 0; i < s.sequences.size(); ++i) seqs.push_back(s.sequence(static_cast<int>(i)));
    std::cout << "return ambiguity basis (per state sequence):\n";
    print_vector_table(std::cout, seqs, a.return_basis, "  ");
    const Mat gen = s.gamma.completeOrthogonalDecomposition().solve(a.return_basis);
    std::cout << "generator (minimum-norm reward per state):\n";
    print_vector_table(std::cout, s.mdp.states, gen, "  ");
  }
  if (a.reward_dim > 0) {
    std::cout << "reward ambiguity basis (per state):\n";
    print_vector_table(std::cout, s.mdp.states, a.reward_basis, "  ");
  }
  return 0;
}

struct LearnArgs {
  std::string mode = "po-aware";
  int epochs = 300;
  double lr = 1e-2;
  double replication = 13.5;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string trace, model;
};

int cmd_learn(const ScenarioArgs& sa, const LearnArgs& la) {
  const Scenario s = sa.load();
  TrainingConfig cfg;
  try {
    cfg.mode = parse_mode(la.mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.epochs = la.epochs;
  cfg.learning_rate = la.lr;
  cfg.replication = la.replication;
  cfg.seed = la.seed_set ? la.seed : default_seed();
  const PipelineResult r = pipeline(s, cfg);
  std::cout << "scenario " << s.name << ", mode " << to_string(cfg.mode) << ", " << r.training.updates << " updates ("
            << r.training.records_per_epoch << " per epoch), final loss " << r.training.trace.back().second << '\n';
  std::cout << "learned reward:\n";
  for (int i = 0; i < s.mdp.num_states(); ++i)
    std::cout << "  " << std::left << std::setw(8) << s.mdp.states[i] << r.training.theta(i) << '\n';
  const std::string act = r.decision_action >= 0 ? s.mdp.actions[r.decision_action] : "-";
  std::cout << "action " << act;
  if (!s.decision_state.empty()) std::cout << " at " << s.decision_state;
  std::cout << " | E+ " << r.measures.E_plus << " | E- " << r.measures.E_minus << " | deceptive inflation "
            << tick(r.flags.deceptive_inflation) << " | overjustification " << tick(r.flags.overjustification)
            << " | optimal " << tick(r.optimal) << '\n';
  std::cout << "J " << r.measures.J << " (optimal " << r.reference.J << "), J_obs " << r.measures.J_obs << '\n';
  if (!la.trace.empty()) {
    std::ofstream f(la.trace);
    if (!f) throw std::runtime_error("cannot write " + la.trace);
    write_trace_csv(f, r.training);
    std::cout << "trace written to " << la.trace << '\n';
  }
  if (!la.model.empty()) {
    std::ofstream f(la.model);
    if (!f) throw std::runtime_error("cannot write " + la.model);
    f << reward_table_json(s.mdp, r.training.theta);
    std::cout << "model written to " << la.model << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string family;
  std::string belief_grid = "0.05:0.95:0.05";
  std::string penalty_grid = "0,0.5,1,2,4";
  double p = 0.5;
  bool trained = false;
  bool closed_form = false;
  int epochs = 300;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string out;
  int max_disagreements = -1;
};

int cmd_sweep(const SweepArgs& a) {
  SweepConfig cfg;
  try {
    cfg.family = parse_family(a.family);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.trained && a.closed_form) throw UsageError("--trained and --closed-form are exclusive");
  cfg.belief_grid = parse_grid(a.belief_grid);
  cfg.penalty_grid = parse_grid(a.penalty_grid);
  cfg.p = a.p;
  cfg.trained = a.trained;
  cfg.training.epochs = a.epochs;
  cfg.seed = a.seed_set ? a.seed : default_seed();
  cfg.jobs = a.jobs;
  SweepResult r;
  try {
    r = run_sweep(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    write_sweep_csv(f, r);
  } else {
    write_sweep_csv(std::cout, r);
  }
  std::cout << "cells: " << r.cells.size() << ", disagreements: " << r.disagreements << " ("
            << r.disagreements_outside_low_region << " at or above the threshold)\n";
  for (const SweepCell& c : r.cells)
    if (!c.agrees)
      std::cout << "  disagree: belief " << c.belief_param << ", penalty " << c.penalty << ": chose " << c.chosen_action
                << ", expected " << c.expected_action << " (threshold " << c.analytic_threshold << ")\n";
  if (a.max_disagreements >= 0 && r.disagreements > a.max_disagreements) return kExitMismatch;
  return 0;
}

int cmd_table1(std::uint64_t seed, int jobs, const std::string& csv) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_table1(seed, jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << format_table1(rows);
  int ok = 0;
  for (const auto& r : rows) ok += r.match;
  std::cout << ok << "/" << rows.size() << " rows matching (" << std::setprecision(3) << secs << " s)\n"
            << std::setprecision(12);
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw std::runtime_error("cannot write " + csv);
    write_table1_csv(f, rows);
  }
  return ok == static_cast<int>(rows.size()) ? 0 : kExitMismatch;
}

int cmd_verify(const std::string& suite, int n, std::uint64_t seed, int jobs) {
  std::vector<std::string> suites;
  if (suite == "all") suites = suite_names();
  else {
    bool known = false;
    for (const auto& s : suite_names()) known = known || s == suite;
    if (!known) throw UsageError("unknown suite '" + suite + "'");
    suites = {suite};
  }
  bool all_ok = true;
  for (const std::string& name : suites) {
    const SuiteResult r = run_suite(name, n, seed, jobs);
    std::cout << name << ": " << r.passed << "/" << r.total << " pass\n";
    for (const auto& line : r.info) std::cout << "  " << line << '\n';
    for (const auto& w : r.witnesses) std::cerr << "counterexample in " << name << ": " << w << '\n';
    all_ok = all_ok && r.passed == r.total;
  }
  return all_ok ? 0 : kExitMismatch;
}

int cmd_show(const ScenarioArgs& sa) {
  const Scenario s = sa.load();
  std::cout << scenario_to_json(s);
  return 0;
}

int cmd_list() {
  std::cout << "example_a\nexample_b\nchain\n";
  for (const auto& n : catalog_names()) std::cout << n << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::cout << std::setprecision(12);
  CLI::App app{"po-rlhf: reward learning from human choices under partial observability"};
  app.require_subcommand(1);

  ScenarioArgs amb_args;
  double tol = kRankTolerance;
  bool exact = false;
  auto* amb = app.add_subcommand("ambiguity", "dimensions of ker B, im Gamma, their intersection and the identifiability verdict");
  amb_args.add(amb);
  amb->add_option("--tolerance", tol, "relative singular-value tolerance");
  amb->add_flag("--exact", exact, "also compute dimensions with exact rational arithmetic");

  ScenarioArgs learn_args;
  LearnArgs la;
  auto* learn = app.add_subcommand("learn", "train a reward model on exact choice probabilities and evaluate the resulting policy");
  learn_args.add(learn);
  learn->add_option("--mode", la.mode, "naive or po-aware");
  learn->add_option("--epochs", la.epochs, "training epochs")->check(CLI::NonNegativeNumber);
  learn->add_option("--lr", la.lr, "learning rate")->check(CLI::PositiveNumber);
  learn->add_option("--replication", la.replication, "records per epoch as a multiple of the dataset size");
  learn->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { la.seed = v; la.seed_set = true; }, "seed");
  learn->add_option("--trace", la.trace, "write the loss trace CSV here");
  learn->add_option("--model", la.model, "write the learned reward table (JSON) here");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "decision threshold sweep over (belief parameter, penalty)");
  sweep->add_option("family", sw.family, "example_a or example_b")->required();
  sweep->add_option("--belief-grid", sw.belief_grid, "start:stop:step or comma list");
  sweep->add_option("--penalty-grid", sw.penalty_grid, "start:stop:step or comma list");
  sweep->add_option("--p", sw.p, "success probability");
  sweep->add_flag("--trained", sw.trained, "train a naive reward model per cell");
  sweep->add_flag("--closed-form", sw.closed_form, "argmax of J_obs (default)");
  sweep->add_option("--epochs", sw.epochs, "epochs per cell when trained");
  sweep->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { sw.seed = v; sw.seed_set = true; }, "seed");
  sweep->add_option("--jobs", sw.jobs, "worker threads (0 = all cores)");
  sweep->add_option("--out", sw.out, "CSV output path (default stdout)");
  sweep->add_option("--max-disagreements", sw.max_disagreements, "exit 1 above this many disagreeing cells");

  std::uint64_t t1_seed = 0;
  bool t1_seed_set = false;
  int t1_jobs = 0;
  std::string t1_csv;
  auto* table1 = app.add_subcommand("table1", "reproduce the eight-row po-aware vs naive comparison");
  table1->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { t1_seed = v; t1_seed_set = true; }, "seed");
  table1->add_option("--jobs", t1_jobs, "worker threads (0 = all cores)");
  table1->add_option("--csv", t1_csv, "also write the table as CSV");

  std::string suite = "all";
  int vn = 100;
  std::uint64_t v_seed = 0;
  bool v_seed_set = false;
  int v_jobs = 0;
  auto* verify = app.add_subcommand("verify", "randomized property suites");
  verify->add_option("--suite", suite, "theorem, interlude, robustness, identifiability, kronecker, kernel or all");
  verify->add_option("--n", vn, "instances per randomized suite")->check(CLI::NonNegativeNumber);
  verify->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { v_seed = v; v_seed_set = true; }, "seed");
  verify->add_option("--jobs", v_jobs, "worker threads (0 = all cores)");

  ScenarioArgs show_args;
  auto* show = app.add_subcommand("show", "print a scenario as JSON");
  show_args.add(show);
  auto* list = app.add_subcommand("list", "list built-in scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (amb->parsed()) return cmd_ambiguity(amb_args, tol, exact);
    if (learn->parsed()) return cmd_learn(learn_args, la);
    if (sweep->parsed()) {
      return cmd_sweep(sw);
    }
    if (table1->parsed()) return cmd_table1(t1_seed_set ? t1_seed : default_seed(), t1_jobs, t1_csv);
    if (verify->parsed()) return cmd_verify(suite, vn, v_seed_set ? v_seed : default_seed(), v_jobs);
    if (show->parsed()) return cmd_show(show_args);
    if (list->parsed()) return cmd_list();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMismatch;
  }
  return kExitUsage;
}
