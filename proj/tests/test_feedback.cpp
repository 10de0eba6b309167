#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "porlhf/diagnostics.hpp"
#include "porlhf/feedback.hpp"
#include "porlhf/random_instances.hpp"
#include "porlhf/scenarios.hpp"

using namespace porlhf;

namespace {
const double e = std::exp(1.0);
}

TEST_CASE("equal returns give one half") {
  Vec g(3);
  g << 2, 2, -1;
  CHECK(full_obs_choice(g, 0, 1, 1.0) == doctest::Approx(0.5));
  CHECK(full_obs_choice(g, 0, 2, 0.5) == doctest::Approx(oracle::sigmoid(1.5)));
  CHECK(full_obs_choice(g, 0, 2, 2.0) + full_obs_choice(g, 2, 0, 2.0) == doctest::Approx(1));
}

TEST_CASE("larger beta sharpens a unit gap") {
  Vec g(2);
  g << 1, 0;
  double prev = 0.5;
  for (double beta = 0.25; beta <= 64; beta *= 2) {
    const double p = full_obs_choice(g, 0, 1, beta);
    CHECK(p > prev);
    prev = p;
  }
  CHECK(prev > 1 - 1e-12);
  CHECK(sigmoid(-800) >= 0.0);
  CHECK(sigmoid(800) == 1.0);
}

TEST_CASE("noise example observation choices") {
  const Scenario s = catalog("noise_goes_well");
  const Vec bg = s.belief * s.returns;
  CHECK(bg(0) == doctest::Approx(0).epsilon(1e-12));
  CHECK(bg(1) == doctest::Approx(1));
  CHECK(obs_choice(s.belief, s.returns, 0, 1, 1.0) == doctest::Approx(1 / (1 + e)));
  CHECK(obs_choice(s.belief, s.returns, 1, 0, 1.0) == doctest::Approx(e / (1 + e)));
}

TEST_CASE("identity belief reduces to full observation") {
  std::mt19937_64 rng(1);
  const Vec g = Vec::Random(5);
  const Mat id = Mat::Identity(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(obs_choice(id, g, i, j, 1.3) == doctest::Approx(full_obs_choice(g, i, j, 1.3)));
}

TEST_CASE("example A silent install against the visible success") {
  for (double ph : {0.2, 0.7})
    for (double r : {0.0, 1.0, 3.0}) {
      const Scenario s = example_a(0.5, r, ph);
      const int o1 = s.space.sequence_map[s.sequence_index("SITT")];
      const int o2 = s.space.sequence_map[s.sequence_index("SIWT")];
      const Vec bg = s.belief * s.returns;
      CHECK(bg(o1) == doctest::Approx(1 - ph * (5 + r)));
      CHECK(bg(o2) == doctest::Approx(11));
      CHECK(obs_choice(s.belief, s.returns, o1, o2, 1.0) == doctest::Approx(oracle::sigmoid(1 - ph * (5 + r) - 11)));
    }
}

TEST_CASE("state level table through the noise kernel") {
  const Scenario s = catalog("noise_goes_well");
  const ChoiceTable t = state_choice_through_obs(s.theta, obs_table(s.belief, s.returns, 1.0));
  CHECK(t.level == ChoiceLevel::StateThroughObs);
  const Vec v = flatten_table(t.prob);
  REQUIRE(v.size() == 4);
  CHECK(v(0) == doctest::Approx(0.5));
  CHECK(v(1) == doctest::Approx((2 + e) / (3 * (1 + e))));
  CHECK(v(2) == doctest::Approx((1 + 2 * e) / (3 * (1 + e))));
  CHECK(v(3) == doctest::Approx(0.5));
  CHECK(unflatten_table(v, 2) == t.prob);
}

TEST_CASE("deterministic observations pass choices through") {
  const Scenario s = example_a(0.5, 1, 0.3);
  const ChoiceTable obs = obs_table(s.belief, s.returns, 1.0);
  const ChoiceTable st = state_choice_through_obs(s.theta, obs);
  for (std::size_t i = 0; i < s.sequences.size(); ++i)
    for (std::size_t j = 0; j < s.sequences.size(); ++j)
      CHECK(st.prob(i, j) == doctest::Approx(obs.prob(s.space.sequence_map[i], s.space.sequence_map[j])));
}

TEST_CASE("state level table matches the double sum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat theta = oracle::random_stochastic(rng, 4, 3);
    const Mat b = oracle::random_stochastic(rng, 3, 4);
    const Vec g = Vec::Random(4);
    const ChoiceTable obs = obs_table(b, g, 0.7);
    const ChoiceTable st = state_choice_through_obs(theta, obs);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double want = 0;
        for (int o = 0; o < 3; ++o)
          for (int q = 0; q < 3; ++q) want += theta(i, o) * theta(j, q) * oracle::sigmoid(0.7 * (b.row(o).dot(g) - b.row(q).dot(g)));
        CHECK(st.prob(i, j) == doctest::Approx(want).epsilon(1e-12));
      }
  }
}

TEST_CASE("inverting choices recovers return differences") {
  const Scenario s = catalog("noise_goes_well");
  const Vec rec = invert_choices(obs_table(s.belief, s.returns, 1.0), 1.0, 1);
  CHECK(rec(0) == doctest::Approx(rec(1) - 1));
  CHECK(rec(1) == 0.0);

  const Vec flat = invert_choices(full_obs_table(Vec::Constant(4, 3.0), 2.0), 2.0);
  CHECK(flat.cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec g = 3 * Vec::Random(6);
    const double beta = u(rng);
    const Vec got = invert_choices(full_obs_table(g, beta), beta, 2);
    CHECK((got - (g.array() - g(2)).matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  Mat sat = Mat::Constant(2, 2, 0.5);
  sat(0, 1) = 1.0;
  sat(1, 0) = 0.0;
  CHECK_THROWS_AS(invert_choices({ChoiceLevel::StateFullObs, sat}, 1.0), std::domain_error);
}

TEST_CASE("exact datasets have one record per pair") {
  CHECK(synthesize_exact(full_obs_table(Vec::Zero(2), 1.0)).size() == 1);
  const Scenario a = example_a(0.5, 1, 0.5);
  CHECK(synthesize_exact(full_obs_table(a.returns, 1.0)).size() == 28);
  // example B has six sequences
  const Scenario b = example_b(0.5, 1, 0.5);
  CHECK(synthesize_exact(full_obs_table(b.returns, 1.0)).size() == 15);
  const ChoiceDataset d = synthesize_exact(full_obs_table(a.returns, 1.0));
  for (const auto& r : d) {
    CHECK(r.left < r.right);
    CHECK(r.target == doctest::Approx(full_obs_choice(a.returns, r.left, r.right, 1.0)));
  }
}

TEST_CASE("sampled datasets follow the targets") {
  const Vec g = (Vec(4) << 0, 0.5, -1, 2).finished();
  const ChoiceTable t = full_obs_table(g, 1.0);
  const int n = 100000;
  const ChoiceDataset d = synthesize_sampled(t, n, 42);
  std::map<std::pair<int, int>, double> wins, total;
  for (const auto& r : d) {
    CHECK((r.target == 0.0 || r.target == 1.0));
    wins[{r.left, r.right}] += r.target * r.weight;
    total[{r.left, r.right}] += r.weight;
  }
  CHECK(total.size() == 6);
  for (const auto& [k, tot] : total) {
    CHECK(tot == n);
    const double p = t.prob(k.first, k.second);
    CHECK(std::fabs(wins[k] / n - p) <= 3 * std::sqrt(p * (1 - p) / n));
  }
  // same seed, same data
  const ChoiceDataset d2 = synthesize_sampled(t, n, 42);
  REQUIRE(d2.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d2[i].weight == d[i].weight);
  CHECK_THROWS_AS(synthesize_sampled(t, 0, 1), std::invalid_argument);
}

TEST_CASE("rng streams are reproducible and distinct") {
  auto a = stream_rng(7, 1, 2), b = stream_rng(7, 1, 2), c = stream_rng(7, 1, 3), d = stream_rng(8, 1, 2);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("dataset CSV round trip") {
  const ChoiceDataset d = synthesize_exact(full_obs_table((Vec(3) << 1, 2, 4).finished(), 0.5));
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const ChoiceDataset back = read_dataset_csv(ss);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].left == d[i].left);
    CHECK(back[i].right == d[i].right);
    CHECK(back[i].target == doctest::Approx(d[i].target).epsilon(1e-15));
  }
  std::stringstream bad("nope\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), std::invalid_argument);
}
