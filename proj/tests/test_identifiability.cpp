#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "porlhf/feedback.hpp"
#include "porlhf/identifiability.hpp"
#include "porlhf/random_instances.hpp"
#include "porlhf/scenarios.hpp"

using namespace porlhf;

namespace {

// Rewards on {W, W_H} only, solved directly from B Gamma R' = 0.
Vec example_a_generator(const Scenario& s) {
  const int w = s.mdp.state_index("W"), wh = s.mdp.state_index("W_H");
  Mat cols(s.gamma.rows(), 2);
  cols << s.gamma.col(w), s.gamma.col(wh);
  const Mat ns = nullspace(s.belief * cols);
  REQUIRE(ns.cols() == 1);
  Vec r = Vec::Zero(s.mdp.num_states());
  r(w) = ns(0, 0);
  r(wh) = ns(1, 0);
  return r;
}

// Two-level tree, every leaf state unique to its sequence.
Mdp leaf_tree(double gamma) {
  Mdp m = make_mdp({"S", "x1", "x2", "y11", "y12", "y21", "y22"}, {"u", "v"}, gamma, 2);
  auto set = [&](const char* a, const char* from, const char* to, double p) {
    m.transition[m.action_index(a)](m.state_index(from), m.state_index(to)) = p;
  };
  set("u", "S", "x1", 1);
  set("v", "S", "x2", 1);
  set("u", "x1", "y11", 1);
  set("v", "x1", "y12", 1);
  set("u", "x2", "y21", 0.5);
  set("u", "x2", "y22", 0.5);
  set("v", "x2", "y22", 1);
  for (auto& t : m.transition)
    for (int s = 0; s < m.num_states(); ++s)
      if (t.row(s).sum() == 0) t(s, s) = 1;
  m.initial(0) = 1;
  return m;
}

// The inductive construction: ordering of sequences with phi(s) = last state.
Vec constructive_reward(const Mdp& m, const std::vector<StateSequence>& seqs, const Vec& g) {
  Vec r = Vec::Zero(m.num_states());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const int phi = seqs[i].back();
    double own = 0, rest = 0, d = 1;
    for (int s : seqs[i]) {
      if (s == phi) own += d;
      else rest += d * r(s);
      d *= m.gamma;
    }
    r(phi) = (g(i) - rest) / own;
  }
  return r;
}

}  // namespace

TEST_CASE("example B has no return ambiguity") {
  for (double pd : {0.1, 0.5, 0.9}) {
    const Scenario s = example_b(0.5, 1, pd);
    const AmbiguitySubspace a = ambiguity(s.belief, s.gamma);
    CHECK(a.return_dim == 0);
    CHECK(identifiability_ladder(s.belief, s.gamma, &s.theta).identifiable);
  }
}

TEST_CASE("example A keeps the hiding direction") {
  for (double pw : {0.3, 0.5, 0.8}) {
    const Scenario s = example_a(0.5, 1, 0.4, pw);
    const AmbiguitySubspace a = ambiguity(s.belief, s.gamma);
    CHECK(a.return_dim >= 1);
    const Vec r = example_a_generator(s);
    const double ph2 = s.belief(s.space.sequence_map[s.sequence_index("SIW_HT")], s.sequence_index("SIW_HT"));
    CHECK(ph2 == doctest::Approx(1 - pw));
    const double rw = r(s.mdp.state_index("W")), rwh = r(s.mdp.state_index("W_H"));
    CHECK(std::fabs(rw * (ph2 - 1) - ph2 * rwh) <= 1e-9);
    // its return lies in the reported subspace
    const Vec g = s.gamma * r;
    const Vec proj = a.return_basis * (a.return_basis.transpose() * g);
    CHECK((g - proj).norm() <= 1e-9 * std::max(1.0, g.norm()));
    CHECK(is_feedback_compatible(s.returns + 25 * g, s.returns, s.belief, 1.0));
  }
}

TEST_CASE("bandit with a shared observation has a one dimensional reward ambiguity") {
  for (double p : {0.3, 0.6}) {
    const Scenario s = catalog("resolving_ambiguity", {{"p", p}});
    const AmbiguitySubspace a = ambiguity(s.belief, s.gamma);
    REQUIRE(a.reward_dim == 1);
    Vec want(3);
    want << p - 1, p, 0;
    const Vec got = a.reward_basis.col(0);
    CHECK(std::fabs(std::fabs(got.dot(want.normalized())) - 1) <= 1e-9);
  }
}

TEST_CASE("feedback compatibility") {
  const Scenario a = example_a(0.5, 1, 0.5);
  CHECK(is_feedback_compatible(a.returns.array() + 7, a.returns, a.belief, 1.0));
  Vec bumped = a.returns;
  bumped(0) += 1;
  CHECK(!is_feedback_compatible(bumped, a.returns, a.belief, 1.0));

  const Scenario b = example_b(0.5, 1, 0.5);
  const AmbiguitySubspace amb = ambiguity(b.belief, b.gamma);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Vec d(b.returns.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = nd(rng);
    d.array() -= d.mean();
    if (d.norm() < 1e-3) continue;
    const Vec gt = b.returns + d;
    CHECK(!is_feedback_compatible(gt, b.returns, b.belief, 1.0));
    CHECK(!differs_by_ambiguity(gt, b.returns, amb));
    // the choice table itself changes
    CHECK((obs_table(b.belief, gt, 1.0).prob - obs_table(b.belief, b.returns, 1.0).prob).cwiseAbs().maxCoeff() > 1e-12);
  }
}

TEST_CASE("ladder verdicts on the catalog") {
  const Scenario noise = catalog("noise_goes_well");
  const LadderReport n = identifiability_ladder(noise.belief, noise.gamma, &noise.theta);
  CHECK(n.ker_b_trivial);
  CHECK(n.ker_b_gamma_trivial);
  CHECK(n.intersection_trivial);
  CHECK(n.theta_injective);
  CHECK(n.theta_kron_injective);
  CHECK(n.identifiable);
  CHECK(n.identifiable_without_observations);

  for (double p : {0.3, 0.7}) {
    const Scenario c = catalog("cheating", {{"p", p}});
    const LadderReport l = identifiability_ladder(c.belief, c.gamma, &c.theta);
    CHECK(!l.ker_b_trivial);
    CHECK(l.ker_b_gamma_trivial);
    CHECK(l.identifiable);
  }
  const Scenario half = catalog("cheating", {{"p", 0.5}});
  const LadderReport h = identifiability_ladder(half.belief, half.gamma, &half.theta);
  CHECK(!h.ker_b_gamma_trivial);
  CHECK(!h.identifiable);
  CHECK(exact_ambiguity_dims(half.belief, half.gamma).return_ambiguity == 1);
  CHECK(exact_ambiguity_dims(catalog("cheating", {{"p", 0.3}}).belief, half.gamma).return_ambiguity == 0);

  const Scenario wrong = catalog("reward_learning_goes_wrong");
  const LadderReport w = identifiability_ladder(wrong.belief, wrong.gamma, &wrong.theta);
  CHECK(!w.intersection_trivial);
  CHECK(!w.identifiable);
}

TEST_CASE("ladder arrows hold on random instances") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const Scenario s = random_scenario(rng, {}, trial % 2 == 0);
    const LadderReport l = identifiability_ladder(s.belief, s.gamma, &s.theta);
    // ker B = 0 and ker(B Gamma) = 0 each rule out a hidden return direction
    if (l.ker_b_trivial) CHECK(l.intersection_trivial);
    if (l.ker_b_gamma_trivial) CHECK(l.intersection_trivial);
    CHECK(l.identifiable == l.intersection_trivial);
    const AmbiguitySubspace a = ambiguity(s.belief, s.gamma);
    CHECK(a.return_dim == a.stacked_dim);
    CHECK(a.reward_dim == a.return_dim + a.ker_gamma_dim);
    // every basis direction is invisible to the human
    if (a.return_dim > 0) CHECK((s.belief * a.return_basis).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("exact and floating dimensions agree on the catalog") {
  for (const auto& name : catalog_names()) {
    const Scenario s = catalog(name);
    const AmbiguitySubspace a = ambiguity(s.belief, s.gamma);
    const ExactDims e = exact_ambiguity_dims(s.belief, s.gamma);
    CHECK(e.return_ambiguity == a.return_dim);
    CHECK(e.reward_ambiguity == a.reward_dim);
    CHECK(e.ker_b == a.ker_b_dim);
    CHECK(e.im_gamma == a.im_gamma_dim);
  }
}

TEST_CASE("time separability") {
  Mdp bandit = make_mdp({"a", "b", "c"}, {"pull"}, 1.0, 0);
  bandit.transition[0].setIdentity();
  bandit.initial << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  const Mat gb = return_operator(bandit, enumerate_state_sequences(bandit));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) CHECK(time_separable(Vec::Random(3), gb).separable);

  const double gamma = 0.8;
  Mdp chain = make_mdp({"a", "b"}, {"go"}, gamma, 1);
  chain.transition[0] << 0, 1, 0, 1;
  chain.initial << 1, 0;
  const Mat gc = return_operator(chain, enumerate_state_sequences(chain));
  // a single sequence: any return value is reachable, the image is one dimensional in reward space
  CHECK(time_separable(Vec::Constant(1, 3.0), gc).separable);
  CHECK(numeric_rank(gc) == 1);
  Vec r(2);
  r << 1, -1 / gamma;
  CHECK((gc * r).norm() < 1e-12);

  // inversed: two sequences through one state each cannot have arbitrary returns
  Mdp two = make_mdp({"s", "t"}, {"stay"}, 1.0, 1);
  two.transition[0] << 1, 0, 0, 1;
  two.initial << 0.5, 0.5;
  const Mat gt = return_operator(two, enumerate_state_sequences(two));
  CHECK(time_separable((Vec(2) << 2, 4).finished(), gt).separable);

  Mdp tied = make_mdp({"s", "t"}, {"x", "y"}, 1.0, 1);
  tied.transition[0] << 1, 0, 0, 1;
  tied.transition[1] << 0, 1, 0, 1;
  tied.initial << 1, 0;
  // sequences ss, st, and the t self loop is unreachable; ss = 2R(s), st = R(s)+R(t)
  const auto tseqs = enumerate_state_sequences(tied);
  CHECK(tseqs.size() == 2);
  CHECK(time_separable((Vec(2) << 1, 5).finished(), return_operator(tied, tseqs)).separable);

  Mdp loop = make_mdp({"s", "t"}, {"x", "y"}, 1.0, 2);
  loop.transition[0] << 1, 0, 1, 0;
  loop.transition[1] << 0, 1, 0, 1;
  loop.initial << 1, 0;
  const auto lseqs = enumerate_state_sequences(loop);
  const Mat gl = return_operator(loop, lseqs);
  // four sequences, two rewards: most return functions are not separable
  const auto res = time_separable(Vec::Random(lseqs.size()) * 3, gl);
  CHECK(!res.separable);
  CHECK(res.residual > 1e-6);
}

TEST_CASE("unique leaves make every return separable") {
  std::mt19937_64 rng(9);
  for (double gamma : {0.5, 0.9, 1.0}) {
    const Mdp m = leaf_tree(gamma);
    const auto seqs = enumerate_state_sequences(m);
    const Mat gm = return_operator(m, seqs);
    for (int trial = 0; trial < 50; ++trial) {
      const Vec g = 4 * Vec::Random(seqs.size());
      const SeparabilityResult res = time_separable(g, gm);
      CHECK(res.separable);
      const Vec r = constructive_reward(m, seqs, g);
      CHECK((gm * r - g).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((gm * res.reward - gm * r).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("reconstruction from exact observation returns") {
  const Scenario b = example_b(0.5, 1, 0.3);
  const Vec gt = reconstruct_return(b.belief, b.belief * b.returns, b.gamma);
  CHECK((gt - b.returns).cwiseAbs().maxCoeff() <= 1e-9);
  const Scenario a = example_a(0.5, 1, 0.5);
  CHECK_THROWS_AS(reconstruct_return(a.belief, a.belief * a.returns, a.gamma), std::domain_error);
}

TEST_CASE("noise example round trip through choice probabilities") {
  const Scenario s = catalog("noise_goes_well");
  const ChoiceTable st = state_choice_through_obs(s.theta, obs_table(s.belief, s.returns, 1.0));
  // undo Theta (x) Theta, which is invertible here
  const Mat ti = s.theta.inverse();
  const Mat obs_level = ti * st.prob * ti.transpose();
  const Vec bg = invert_choices({ChoiceLevel::Observation, obs_level}, 1.0);
  const Vec g = reconstruct_return(s.belief, bg, s.gamma);
  const Vec d = g - s.mdp.reward;
  CHECK((d.array() - d(0)).abs().maxCoeff() <= 1e-6);
  CHECK(s.mdp.reward(0) == -1);
  CHECK(s.mdp.reward(1) == 2);
}

TEST_CASE("robustness bound basics") {
  const Scenario b = example_b(0.5, 1, 0.5);
  const RobustnessBound z = robustness_bound(b.belief, b.gamma, b.returns, 0.0);
  CHECK(z.bound == 0.0);
  CHECK(z.rho_max > 0);
  CHECK(bound_polynomial(1, 1) == doctest::Approx(13));
  CHECK(bound_polynomial(2, 0.5) == doctest::Approx(1 * (12 * 2 * 0.25 + 1)));
  CHECK_THROWS_AS(robustness_bound(b.belief, b.gamma, b.returns, 10 * z.rho_max + 1), std::domain_error);

  const Scenario n = catalog("noise_goes_well");
  const RobustnessBound sq = robustness_bound(n.belief, n.gamma, n.returns, 0.01);
  CHECK(sq.square);
  const double binv = operator_norm(n.belief.inverse());
  CHECK(sq.square_bound == doctest::Approx(0.01 * 2 * operator_norm(n.belief) * n.returns.norm() * binv * binv));
}

TEST_CASE("perturbed beliefs stay inside the bound") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> nd(0, 1);
  int done = 0;
  double worst = 0;
  while (done < 100) {
    const Scenario s = random_scenario(rng, {}, done % 2 == 0);
    if (s.returns.norm() < 1e-6 || ambiguity(s.belief, s.gamma).return_dim != 0) continue;
    const RobustnessBound probe = robustness_bound(s.belief, s.gamma, s.returns, 0.0);
    const double rho = probe.rho_max * u(rng);
    const RobustnessBound bd = robustness_bound(s.belief, s.gamma, s.returns, rho);
    Mat delta(s.belief.rows(), s.belief.cols());
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = nd(rng);
    delta *= rho * u(rng) / operator_norm(delta);
    const Vec gt = reconstruct_return(s.belief + delta, s.belief * s.returns, s.gamma);
    const double err = (gt - s.returns).norm();
    CHECK(err <= bd.bound * (1 + 1e-9));
    CHECK(bd.bound == doctest::Approx(rho * s.returns.norm() * bound_polynomial(bd.X, bd.Y)));
    if (bd.square) CHECK(err <= bd.square_bound * (1 + 1e-9));
    worst = std::max(worst, err / bd.bound);
    ++done;
  }
  CHECK(worst < 1);
}

TEST_CASE("worst feedback compatible policy") {
  const Scenario bandit = catalog("resolving_ambiguity");
  const WorstCase w = worst_feedback_compatible_policy(bandit.mdp, bandit.sequences, bandit.belief, bandit.gamma,
                                                       bandit.returns, 10.0);
  CHECK(w.chosen_sequence == 0);
  CHECK(w.regret > 0);
  CHECK(is_feedback_compatible(w.g_tilde, bandit.returns, bandit.belief, 1.0));

  const Scenario b = example_b(0.5, 1, 0.5);
  CHECK_THROWS_WITH_AS(worst_feedback_compatible_policy(b.mdp, b.sequences, b.belief, b.gamma, b.returns, 10.0),
                       "nothing to exploit", std::invalid_argument);

  const Scenario a = example_a(0.5, 1, 0.5);
  const WorstCase wa = worst_feedback_compatible_policy(a.mdp, a.sequences, a.belief, a.gamma, a.returns, 50.0, 11);
  REQUIRE(wa.policy.size() == 3);
  // a big enough push makes the hidden loss at the start look best
  CHECK(a.mdp.actions[greedy_actions(wa.policy[0])[a.mdp.state_index("S")]] == "a_H");
  CHECK(wa.regret == doctest::Approx(1 + 0.5 * 10 - 0.5 * 5 + 5 + 1));
  const WorstCase small = worst_feedback_compatible_policy(a.mdp, a.sequences, a.belief, a.gamma, a.returns, 5.0, 11);
  CHECK(small.regret > 0);
  CHECK(small.regret <= wa.regret);
}
