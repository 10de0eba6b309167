#include "porlhf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "porlhf/feedback.hpp"
#include "porlhf/identifiability.hpp"
#include "porlhf/random_instances.hpp"
#include "porlhf/scenario_io.hpp"

namespace porlhf {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

ChoiceDataset exact_dataset(const Scenario& s) {
  const ChoiceTable obs_level = obs_table(s.belief, s.returns, s.beta);
  return synthesize_exact(state_choice_through_obs(s.theta, obs_level));
}

LossContext loss_context(const Scenario& s) { return {s.gamma, s.belief, s.theta, s.beta}; }

int decision_action(const Scenario& s, const TimedPolicy& pi) {
  const int d = s.decision_index();
  if (d < 0 || pi.empty()) return -1;
  int t_min = -1;
  for (const StateSequence& q : s.sequences)
    for (int t = 0; t < s.mdp.horizon; ++t)
      if (q[t] == d && (t_min < 0 || t < t_min)) t_min = t;
  if (t_min < 0) return -1;
  return s.canonical_action(d, greedy_actions(pi[t_min])[d]);
}

PipelineResult pipeline(const Scenario& s, const TrainingConfig& cfg) {
  PipelineResult r;
  r.training = train(cfg, exact_dataset(s), loss_context(s));
  r.plan = value_iteration(s.mdp, r.training.theta);
  r.distribution = trajectory_distribution(s.mdp, s.sequences, r.plan.per_time);
  const Vec gobs = s.obs_returns();
  r.measures = measure_policy(r.distribution, s.returns, gobs);
  const Plan truth = value_iteration(s.mdp, s.mdp.reward);
  r.reference = measure_policy(trajectory_distribution(s.mdp, s.sequences, truth.per_time), s.returns, gobs);
  r.flags = classify(r.measures, r.reference);
  r.optimal = r.measures.J >= r.reference.J - 1e-9;
  r.decision_action = decision_action(s, r.plan.per_time);
  return r;
}

std::vector<Table1Row> table1_rows() {
  const double na = std::nan("");
  using M = LearningMode;
  return {
      {'A', 0.5, 0.5, na, M::Naive, "a_H", 1.5, true, 0, false, false},
      {'A', 0.5, 0.5, na, M::PoAware, "a_H", 1.5, true, 0, false, false},
      {'A', 0.1, 0.9, na, M::Naive, "a_C", 0, false, 0, true, false},
      {'A', 0.1, 0.9, na, M::PoAware, "a_T", 0, false, 5.4, false, true},
      {'B', 0.5, na, 0.9, M::Naive, "a_T", 4.5, true, 0, true, false},
      {'B', 0.5, na, 0.9, M::PoAware, "a_D", 0, false, 0.25, false, true},
      {'B', 0.5, na, 0.1, M::Naive, "a_V", 0, false, 0, true, false},
      {'B', 0.5, na, 0.1, M::PoAware, "a_D", 0, false, 2.25, false, true},
  };
}

Scenario table1_scenario(const Table1Row& row) {
  const double r = 1.0;
  return row.example == 'A' ? example_a(row.p, r, row.p_hide) : example_b(row.p, r, row.p_default);
}

std::vector<Table1Result> run_table1(std::uint64_t seed, int jobs, const TrainingConfig* base) {
  const auto rows = table1_rows();
  std::vector<Table1Result> out(rows.size());
  parallel_for(static_cast<int>(rows.size()), jobs, [&](int i) {
    const Table1Row& row = rows[i];
    const Scenario s = table1_scenario(row);
    TrainingConfig cfg = base ? *base : TrainingConfig{};
    cfg.mode = row.mode;
    cfg.seed = seed;
    const PipelineResult pr = pipeline(s, cfg);
    Table1Result& t = out[i];
    t.expected = row;
    t.action = pr.decision_action >= 0 ? s.mdp.actions[pr.decision_action] : "?";
    t.e_plus = pr.measures.E_plus;
    t.e_minus = pr.measures.E_minus;
    t.deceptive_inflation = pr.flags.deceptive_inflation;
    t.overjustification = pr.flags.overjustification;
    t.optimal = pr.optimal;
    t.updates = pr.training.updates;
    std::ostringstream mm;
    if (t.action != row.action) mm << "action " << t.action << " != " << row.action << "; ";
    if (std::fabs(t.e_plus - row.e_plus) > 1e-6) mm << "E+ " << t.e_plus << " != " << row.e_plus << "; ";
    if (std::fabs(t.e_minus - row.e_minus) > 1e-6) mm << "E- " << t.e_minus << " != " << row.e_minus << "; ";
    if (t.deceptive_inflation != row.deceptive_inflation) mm << "deceptive inflation flag; ";
    if (t.overjustification != row.overjustification) mm << "overjustification flag; ";
    if (t.optimal != row.optimal) mm << "optimal flag; ";
    t.mismatch = mm.str();
    t.match = t.mismatch.empty();
  });
  return out;
}

namespace {

std::string na_or(double v) {
  if (std::isnan(v)) return "N/A";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

const char* mark(bool b) { return b ? "yes" : "no"; }

}  // namespace

std::string format_table1(const std::vector<Table1Result>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(4) << "ex" << std::setw(6) << "p" << std::setw(8) << "p_hide" << std::setw(11) << "p_default"
     << std::setw(10) << "model" << std::setw(8) << "action" << std::setw(14) << "E+" << std::setw(10) << "dec.infl."
     << std::setw(14) << "E-" << std::setw(8) << "overj." << std::setw(9) << "optimal" << "match\n";
  for (const Table1Result& r : rows) {
    os << std::setw(4) << r.expected.example << std::setw(6) << na_or(r.expected.p) << std::setw(8) << na_or(r.expected.p_hide)
       << std::setw(11) << na_or(r.expected.p_default) << std::setw(10) << to_string(r.expected.mode) << std::setw(8)
       << r.action << std::setw(14) << na_or(r.e_plus) << std::setw(10) << mark(r.deceptive_inflation) << std::setw(14)
       << na_or(r.e_minus) << std::setw(8) << mark(r.overjustification) << std::setw(9) << mark(r.optimal)
       << (r.match ? "ok" : "MISMATCH: " + r.mismatch) << '\n';
  }
  return os.str();
}

void write_table1_csv(std::ostream& os, const std::vector<Table1Result>& rows) {
  os << "example,p,p_hide,p_default,model,action,e_plus,deceptive_inflation,e_minus,overjustification,optimal,updates,match\n";
  os << std::setprecision(12);
  for (const Table1Result& r : rows)
    os << r.expected.example << ',' << na_or(r.expected.p) << ',' << na_or(r.expected.p_hide) << ','
       << na_or(r.expected.p_default) << ',' << to_string(r.expected.mode) << ',' << r.action << ',' << r.e_plus << ','
       << (r.deceptive_inflation ? "true" : "false") << ',' << r.e_minus << ',' << (r.overjustification ? "true" : "false")
       << ',' << (r.optimal ? "true" : "false") << ',' << r.updates << ',' << (r.match ? "true" : "false") << '\n';
}

SweepFamily parse_family(const std::string& s) {
  if (s == "a" || s == "A" || s == "example_a") return SweepFamily::A;
  if (s == "b" || s == "B" || s == "example_b") return SweepFamily::B;
  throw std::invalid_argument("unknown sweep family '" + s + "' (example_a, example_b)");
}

std::vector<double> default_belief_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(i * 0.05);
  return g;
}

std::vector<double> default_penalty_grid() { return {0, 0.5, 1, 2, 4}; }

SweepResult run_sweep(const SweepConfig& cfg) {
  SweepResult res;
  const int nb = static_cast<int>(cfg.belief_grid.size());
  const int n = nb * static_cast<int>(cfg.penalty_grid.size());
  res.cells.resize(n);
  parallel_for(n, cfg.jobs, [&](int i) {
    SweepCell& c = res.cells[i];
    c.penalty = cfg.penalty_grid[i / nb];
    c.belief_param = cfg.belief_grid[i % nb];
    const bool a = cfg.family == SweepFamily::A;
    const Scenario s = a ? example_a(cfg.p, c.penalty, c.belief_param) : example_b(cfg.p, c.penalty, c.belief_param);
    c.analytic_threshold = a ? threshold_a(c.penalty) : threshold_b(cfg.p, c.penalty);
    const char* below = a ? "a_H" : "a_V";
    const char* above = a ? "a_C" : "a_T";
    int act;
    if (cfg.trained) {
      TrainingConfig t = cfg.training;
      t.mode = LearningMode::Naive;
      t.seed = stream_rng(cfg.seed, static_cast<std::uint64_t>(i), 0x5fee9ULL)();
      act = pipeline(s, t).decision_action;
    } else {
      act = best_decision_action(s, s.obs_returns());
    }
    c.chosen_action = act >= 0 ? s.mdp.actions[act] : "?";
    c.boundary = std::fabs(c.belief_param - c.analytic_threshold) <= 1e-9;
    c.expected_action = c.boundary ? std::string(below) + "|" + above : (c.belief_param < c.analytic_threshold ? below : above);
    c.agrees = c.boundary ? (c.chosen_action == below || c.chosen_action == above) : c.chosen_action == c.expected_action;
  });
  for (const SweepCell& c : res.cells) {
    if (c.agrees) continue;
    ++res.disagreements;
    if (c.belief_param >= c.analytic_threshold) ++res.disagreements_outside_low_region;
  }
  return res;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "belief_param,penalty,chosen_action,analytic_threshold,agrees\n" << std::setprecision(12);
  for (const SweepCell& c : r.cells)
    os << c.belief_param << ',' << c.penalty << ',' << c.chosen_action << ',' << c.analytic_threshold << ','
       << (c.agrees ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------- suites

namespace {

struct Outcome {
  bool ok = true;
  std::string witness;
  double metric = std::numeric_limits<double>::quiet_NaN();
  bool flag = false;
};

std::string describe(const Scenario& s, const std::string& why) { return why + "\n" + scenario_to_json(s); }

std::string mat_string(const Mat& m) {
  std::ostringstream os;
  os << std::setprecision(12) << m;
  return os.str();
}

Outcome theorem_case(std::mt19937_64& rng) {
  RandomMdpOptions opt;
  const Scenario s = random_scenario(rng, opt, true);
  const DilemmaReport rep = verify_dilemma(s.mdp, s.sequences, s.space, s.belief);
  Outcome o;
  o.flag = rep.status == DilemmaStatus::Holds;
  if (rep.status == DilemmaStatus::Violated) {
    o.ok = false;
    o.witness = describe(s, "obs-optimal policy is neither deceptive nor overjustified");
  }
  return o;
}

Outcome interlude_case(std::mt19937_64& rng, int i) {
  RandomMdpOptions opt;
  Scenario s;
  s.mdp = random_mdp(rng, opt);
  s.name = "interlude";
  s.obs = i % 2 == 0 ? random_deterministic_observations(rng, s.mdp.num_states())
                     : random_stochastic_observations(rng, s.mdp.num_states(), s.mdp.num_states() + 1);
  s.derive();
  const Policy pi = random_row_stochastic(rng, s.mdp.num_states(), s.mdp.num_actions(), 0.0);
  s.belief = policy_aware_belief(s.mdp, pi, s.obs, s.sequences, s.space);
  const Vec d = trajectory_distribution(s.mdp, s.sequences, pi);
  const double j = policy_value(d, s.returns);
  const double jo = observation_value(d, s.obs_returns());
  Outcome o;
  o.metric = std::fabs(j - jo);
  if (o.metric > 1e-9) {
    o.ok = false;
    o.witness = describe(s, "J_obs differs from J by " + std::to_string(o.metric));
  }
  return o;
}

Outcome robustness_case(std::mt19937_64& rng, int i) {
  RandomMdpOptions opt;
  Scenario s;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 1000) throw std::runtime_error("no identifiable random instance found");
    s = random_scenario(rng, opt, i % 2 == 0);
    if (s.returns.norm() < 1e-6) continue;
    if (numeric_rank(s.gamma) == 0) continue;
    if (ambiguity(s.belief, s.gamma).return_dim == 0) break;
  }
  const Vec bg = s.belief * s.returns;
  const RobustnessBound probe = robustness_bound(s.belief, s.gamma, s.returns, 0.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double rho = probe.rho_max * u(rng);
  const RobustnessBound bound = robustness_bound(s.belief, s.gamma, s.returns, rho);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat delta(s.belief.rows(), s.belief.cols());
  for (Eigen::Index r = 0; r < delta.rows(); ++r)
    for (Eigen::Index c = 0; c < delta.cols(); ++c) delta(r, c) = nd(rng);
  delta *= rho * u(rng) / operator_norm(delta);
  const Vec gt = reconstruct_return(s.belief + delta, bg, s.gamma);
  const double err = (gt - s.returns).norm();
  Outcome o;
  o.metric = bound.bound > 0 ? err / bound.bound : 0.0;
  o.flag = bound.square;
  if (err > bound.bound * (1 + 1e-9) + 1e-12)
    o.ok = false;
  if (bound.square && err > bound.square_bound * (1 + 1e-9) + 1e-12) o.ok = false;
  if (!o.ok) {
    std::ostringstream os;
    os << "error " << err << " exceeds bound " << bound.bound << " (square " << bound.square_bound << ") at rho " << rho
       << "\ndelta:\n" << mat_string(delta);
    o.witness = describe(s, os.str());
  }
  return o;
}

Outcome kronecker_case(std::mt19937_64& rng) {
  const int rows = std::uniform_int_distribution<int>(1, 5)(rng);
  const int cols = std::uniform_int_distribution<int>(1, 5)(rng);
  Mat theta = random_row_stochastic(rng, rows, cols, 0.3);
  // Sometimes force a dependent column pair.
  if (cols >= 2 && std::uniform_real_distribution<double>(0, 1)(rng) < 0.25) {
    theta.col(1) = theta.col(0);
    for (int r = 0; r < rows; ++r) theta.row(r) /= theta.row(r).sum();
  }
  const bool a = injectivity(theta).injective;
  const bool b = injectivity(kronecker_square(theta)).injective;
  Outcome o;
  o.flag = a;
  if (a != b) {
    o.ok = false;
    o.witness = "injective(Theta) = " + std::string(a ? "true" : "false") + " but Kronecker square disagrees\n" + mat_string(theta);
  }
  return o;
}

Outcome kernel_case(std::mt19937_64& rng) {
  RandomMdpOptions opt;
  const Scenario s = random_scenario(rng, opt, true);
  int expected = 0;
  std::vector<int> count(s.space.size(), 0);
  for (int o : s.space.sequence_map) ++count[o];
  for (int k : count) expected += k - 1;
  const int actual = static_cast<int>(s.belief.cols()) - exact_rank(s.belief);
  Outcome o;
  if (actual != expected) {
    o.ok = false;
    o.witness = describe(s, "dim ker B = " + std::to_string(actual) + ", expected " + std::to_string(expected));
  }
  return o;
}

SuiteResult random_suite(const std::string& name, int n, std::uint64_t seed, int jobs, std::uint64_t key,
                         const std::function<Outcome(std::mt19937_64&, int)>& fn) {
  std::vector<Outcome> outs(std::max(n, 0));
  parallel_for(n, jobs, [&](int i) {
    std::mt19937_64 rng = stream_rng(seed, key, static_cast<std::uint64_t>(i));
    outs[i] = fn(rng, i);
  });
  SuiteResult r;
  r.name = name;
  r.total = n;
  double max_metric = -1;
  int flags = 0;
  for (int i = 0; i < n; ++i) {
    if (outs[i].ok) ++r.passed;
    else r.witnesses.push_back("case " + std::to_string(i) + ": " + outs[i].witness);
    if (!std::isnan(outs[i].metric)) max_metric = std::max(max_metric, outs[i].metric);
    if (outs[i].flag) ++flags;
  }
  std::ostringstream os;
  os << std::setprecision(12);
  if (name == "theorem") os << flags << " non-vacuous instances";
  else if (name == "interlude") os << "max |J_obs - J| = " << max_metric;
  else if (name == "robustness") os << "max error/bound ratio = " << max_metric << "; square cases " << flags;
  else if (name == "kronecker") os << flags << " injective kernels";
  if (!os.str().empty()) r.info.push_back(os.str());
  return r;
}

struct CatalogCase {
  std::string label;
  Scenario s;
};

std::vector<CatalogCase> catalog_cases() {
  std::vector<CatalogCase> out;
  for (const std::string& n : catalog_names()) {
    if (n == "all_quadrants") {
      for (int v = 1; v <= 4; ++v) out.push_back({n + " variant " + std::to_string(v), catalog(n, {{"variant", v}})});
    } else if (n == "has_all_properties") {
      for (int v = 1; v <= 2; ++v) out.push_back({n + " variant " + std::to_string(v), catalog(n, {{"variant", v}})});
    } else if (n == "modeling_somewhat_crucial") {
      for (int v = 0; v <= 1; ++v) out.push_back({n + " variant " + std::to_string(v), catalog(n, {{"variant", v}})});
      // on the non-injective surface p_b = gamma E[lambda] p_a
      out.push_back({n + " degenerate", catalog(n, {{"p_a", 0.5}, {"p_b", 0.225}, {"p_c", 0.275}})});
    } else if (n == "cheating") {
      for (double p : {0.3, 0.5, 0.7}) out.push_back({n + " p=" + na_or(p), catalog(n, {{"p", p}})});
    } else {
      out.push_back({n, catalog(n)});
    }
  }
  Scenario a = example_a(0.5, 1, 0.5);
  a.golden = {{"return_ambiguity_dim", 2}, {"identifiable", 0}};
  out.push_back({"example_a", a});
  Scenario b = example_b(0.5, 1, 0.5);
  b.golden = {{"return_ambiguity_dim", 0}, {"identifiable", 1}};
  out.push_back({"example_b", b});
  Scenario c = chain_example(0.9);
  c.golden = {{"ker_b_trivial", 1}, {"ker_b_gamma_trivial", 0}, {"identifiable", 1}};
  out.push_back({"chain", c});
  return out;
}

// Golden facts plus the ladder arrows and the round trip.
Outcome identifiability_case(const CatalogCase& cc) {
  const Scenario& s = cc.s;
  Outcome o;
  std::ostringstream why;
  for (const GoldenCheck& g : check_golden(s))
    if (!g.ok) why << g.key << ": expected " << g.expected << ", got " << g.actual << "; ";
  const LadderReport l = identifiability_ladder(s.belief, s.gamma, &s.theta);
  if (l.ker_b_trivial && !l.intersection_trivial) why << "ker B trivial but ambiguity is not; ";
  if (l.ker_b_gamma_trivial && !l.intersection_trivial) why << "ker(B Gamma) trivial but ambiguity is not; ";
  const Vec bg = s.belief * s.returns;
  bool round_trip = false;
  try {
    const Vec gt = reconstruct_return(s.belief, bg, s.gamma);
    const Vec d = gt - s.returns;
    round_trip = (d.array() - d.mean()).matrix().norm() <= 1e-6 * std::max(1.0, s.returns.norm());
  } catch (const std::domain_error&) {
    round_trip = false;
  }
  if (round_trip != l.intersection_trivial) why << "round trip disagrees with ambiguity verdict; ";
  const AmbiguitySubspace amb = ambiguity(s.belief, s.gamma);
  for (int k = 0; k < amb.return_dim; ++k)
    if (!is_feedback_compatible(s.returns + amb.return_basis.col(k), s.returns, s.belief, s.beta))
      why << "ambiguity direction changes choice probabilities; ";
  if (amb.reward_dim < amb.ker_gamma_dim) why << "reward ambiguity smaller than ker Gamma; ";
  if (!why.str().empty()) {
    o.ok = false;
    o.witness = cc.label + ": " + why.str();
  }
  return o;
}

}  // namespace

std::vector<std::string> suite_names() { return {"theorem", "interlude", "robustness", "identifiability", "kronecker", "kernel"}; }

SuiteResult run_suite(const std::string& name, int n, std::uint64_t seed, int jobs) {
  if (name == "theorem") return random_suite(name, n, seed, jobs, 1, [](std::mt19937_64& g, int) { return theorem_case(g); });
  if (name == "interlude") return random_suite(name, n, seed, jobs, 2, interlude_case);
  if (name == "robustness") return random_suite(name, n, seed, jobs, 3, robustness_case);
  if (name == "kronecker") {
    SuiteResult r = random_suite(name, n, seed, jobs, 4, [](std::mt19937_64& g, int) { return kronecker_case(g); });
    Mat caveat(3, 3);
    caveat << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.375, 0.375, 0.25;
    ++r.total;
    const InjectivityResult c = injectivity(caveat);
    if (!c.injective && c.rank == 2 && exact_rank(caveat) == 2) ++r.passed;
    else r.witnesses.push_back("caveat matrix reported injective");
    r.info.push_back("caveat matrix rank " + std::to_string(c.rank) + ", injective " + (c.injective ? "yes" : "no"));
    return r;
  }
  if (name == "kernel") return random_suite(name, n, seed, jobs, 5, [](std::mt19937_64& g, int) { return kernel_case(g); });
  if (name == "identifiability") {
    const auto cases = catalog_cases();
    std::vector<Outcome> outs(cases.size());
    parallel_for(static_cast<int>(cases.size()), jobs, [&](int i) { outs[i] = identifiability_case(cases[i]); });
    SuiteResult r;
    r.name = name;
    r.total = static_cast<int>(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (outs[i].ok) ++r.passed;
      else r.witnesses.push_back(outs[i].witness);
    }
    r.info.push_back(std::to_string(cases.size()) + " catalog scenarios checked");
    return r;
  }
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace porlhf
