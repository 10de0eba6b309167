#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "porlhf/linalg.hpp"
#include "porlhf/observability.hpp"
#include "porlhf/random_instances.hpp"
#include "porlhf/scenarios.hpp"

using namespace porlhf;

namespace {

Mat noise_kernel() {
  Mat k(2, 2);
  k << 2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3;
  return k;
}

Mat caveat() {
  Mat c(3, 3);
  c << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.375, 0.375, 0.25;
  return c;
}

}  // namespace

TEST_CASE("example A has five observation sequences") {
  const Scenario s = example_a(0.5, 1, 0.5);
  CHECK(s.space.size() == 5);
  CHECK(s.space.deterministic());
  std::set<std::string> names;
  for (const auto& o : s.space.sequences) names.insert(observation_sequence_name(s.obs, o));
  CHECK(names == std::set<std::string>{"o_0o_0o_0o_0", "o_0o_Lo_0o_0", "o_0o_Io_0o_0", "o_0o_Io_Lo_0", "o_0o_Io_Wo_0"});
  // SIWT and SIW_HT share their observation sequence
  CHECK(s.space.sequence_map[s.sequence_index("SIWT")] == s.space.sequence_map[s.sequence_index("SIW_HT")]);
  CHECK(s.space.sequence_map[s.sequence_index("SL_HTT")] == s.space.sequence_map[s.sequence_index("STTT")]);
}

TEST_CASE("identity observations give the identity kernel") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Mdp m = random_mdp(rng);
    const auto seqs = enumerate_state_sequences(m);
    const auto space = build_observation_space(identity_observations(m), seqs);
    REQUIRE(space.size() == static_cast<int>(seqs.size()));
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      CHECK(space.sequences[i] == seqs[i]);
      CHECK(space.sequence_map[i] == static_cast<int>(i));
    }
    CHECK(ungrounding_operator(space).isApprox(Mat::Identity(seqs.size(), seqs.size())));
  }
}

TEST_CASE("noise kernel product matches enumeration") {
  Mdp m = make_mdp({"a", "b"}, {"x", "y"}, 1.0, 2);
  m.transition[0] << 0.5, 0.5, 0.2, 0.8;
  m.transition[1] << 1, 0, 0, 1;
  m.initial << 0.5, 0.5;
  ObservationModel om;
  om.observations = {"oa", "ob"};
  om.kernel = noise_kernel();
  const auto seqs = enumerate_state_sequences(m);
  const auto space = build_observation_space(om, seqs);
  CHECK(!space.deterministic());
  CHECK(space.size() == 8);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    CHECK(space.kernel.row(i).sum() == doctest::Approx(1).epsilon(1e-10));
    for (int o = 0; o < space.size(); ++o)
      CHECK(space.kernel(i, o) == doctest::Approx(oracle::obs_prob(om.kernel, seqs[i], space.sequences[o])).epsilon(1e-12));
  }
}

TEST_CASE("stochastic kernels match enumeration on random instances") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Mdp m = random_mdp(rng);
    const int no = 1 + trial % 3;
    const ObservationModel om = random_stochastic_observations(rng, m.num_states(), no);
    const auto seqs = enumerate_state_sequences(m);
    const auto space = build_observation_space(om, seqs);
    // every listed observation sequence is possible and every possible one is listed
    int possible = 0;
    for (const auto& w : oracle::all_words(no, m.horizon + 1)) {
      double mass = 0;
      for (const auto& s : seqs) mass += oracle::obs_prob(om.kernel, s, w);
      if (mass > 0) {
        ++possible;
        CHECK(space.index_of(w) >= 0);
      }
    }
    CHECK(space.size() == possible);
    const Mat theta = ungrounding_operator(space);
    for (std::size_t i = 0; i < seqs.size(); ++i)
      for (int o = 0; o < space.size(); ++o)
        CHECK(theta(i, o) == doctest::Approx(oracle::obs_prob(om.kernel, seqs[i], space.sequences[o])).epsilon(1e-12));
  }
}

TEST_CASE("deterministic theta is injective") {
  const Scenario s = example_a(0.5, 1, 0.5);
  const Mat th = ungrounding_operator(s.space);
  for (Eigen::Index r = 0; r < th.rows(); ++r) CHECK(th.row(r).sum() == 1.0);
  CHECK(injectivity(th).injective);
  CHECK(injectivity(th).rank == s.space.size());
}

TEST_CASE("noise theta is invertible") {
  const Mat th = noise_kernel();
  CHECK(injectivity(th).injective);
  Mat inv(2, 2);
  inv << 2, -1, -1, 2;
  CHECK(th.inverse().isApprox(inv, 1e-12));
  const Scenario s = catalog("noise_goes_well");
  CHECK(s.theta.isApprox(th, 1e-12));
}

TEST_CASE("caveat matrix is not injective") {
  const auto r = injectivity(caveat());
  CHECK(!r.injective);
  CHECK(r.rank == 2);
  CHECK(exact_rank(caveat()) == 2);
  // third row is the average of the first two
  const Mat c = caveat();
  CHECK((0.5 * c.row(0) + 0.5 * c.row(1) - c.row(2)).norm() == 0.0);
  CHECK(injectivity(Mat::Identity(4, 4)).injective);
}

TEST_CASE("kronecker square entries and implicit apply") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat th = oracle::random_stochastic(rng, 3, 2);
    const Mat k = kronecker_square(th);
    CHECK(k.isApprox(oracle::kron_loops(th), 1e-14));
    const Mat p = Mat::Random(2, 2);
    CHECK(kronecker_square_apply(th, p).isApprox(th * p * th.transpose(), 1e-12));
  }
  CHECK_THROWS_AS(kronecker_square(Mat::Ones(20, 20), 1000), std::length_error);
}

TEST_CASE("injectivity of theta and its kronecker square agree") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> dim(1, 4);
  int injective = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    Mat th = random_row_stochastic(rng, rows, cols, 0.3);
    if (trial % 5 == 0 && cols > 1) {
      th = oracle::random_stochastic(rng, rows, cols);
      th.col(cols - 1) = th.col(0);
      for (int r = 0; r < rows; ++r) th.row(r) /= th.row(r).sum();
    }
    const bool a = injectivity(th).injective;
    // direct rank on the loop-built square, independent of the library's Kronecker code
    const bool b = numeric_rank(oracle::kron_loops(th)) == cols * cols;
    CHECK(a == b);
    CHECK(a == (exact_rank(th) == cols));
    injective += a;
  }
  CHECK(injective > 0);
  CHECK(injective < 50);
}
