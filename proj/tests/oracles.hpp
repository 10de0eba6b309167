#pragma once

// Brute-force reference implementations for the tests. They only use the
// plain data structs (Mdp, kernels, matrices), never the library algorithms.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "porlhf/mdp.hpp"

namespace oracle {

using porlhf::Mat;
using porlhf::Mdp;
using porlhf::StateSequence;
using porlhf::Vec;

// Every positive-probability path, found by depth-first search.
inline std::vector<StateSequence> dfs_paths(const Mdp& m) {
  std::vector<StateSequence> out;
  StateSequence cur;
  std::function<void()> go = [&]() {
    if (static_cast<int>(cur.size()) == m.horizon + 1) {
      out.push_back(cur);
      return;
    }
    for (int t = 0; t < m.num_states(); ++t) {
      bool edge = false;
      for (int a = 0; a < m.num_actions(); ++a) edge = edge || m.transition[a](cur.back(), t) > 0;
      if (!edge) continue;
      cur.push_back(t);
      go();
      cur.pop_back();
    }
  };
  for (int s = 0; s < m.num_states(); ++s) {
    if (m.initial(s) <= 0) continue;
    cur = {s};
    go();
  }
  return out;
}

inline double path_prob(const Mdp& m, const Mat& pi, const StateSequence& seq) {
  double p = m.initial(seq[0]);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    double step = 0;
    for (int a = 0; a < m.num_actions(); ++a) step += pi(seq[t], a) * m.transition[a](seq[t], seq[t + 1]);
    p *= step;
  }
  return p;
}

inline double path_return(const Mdp& m, const Vec& reward, const StateSequence& seq) {
  double g = 0, d = 1;
  for (int s : seq) {
    g += d * reward(s);
    d *= m.gamma;
  }
  return g;
}

inline double value(const Mdp& m, const Mat& pi, const std::vector<StateSequence>& seqs, const Vec& per_seq) {
  double j = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) j += path_prob(m, pi, seqs[i]) * per_seq(i);
  return j;
}

// Deterministic policies as action-per-state vectors, odometer order.
inline std::vector<std::vector<int>> all_action_maps(int ns, int na) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(ns, 0);
  while (true) {
    out.push_back(cur);
    int k = ns - 1;
    while (k >= 0 && ++cur[k] == na) cur[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

inline Mat one_hot_policy(int ns, int na, const std::vector<int>& acts) {
  Mat pi = Mat::Zero(ns, na);
  for (int s = 0; s < ns; ++s) pi(s, acts[s]) = 1;
  return pi;
}

// Observation-sequence probability P(o | s) as a plain product.
inline double obs_prob(const Mat& kernel, const StateSequence& s, const std::vector<int>& o) {
  double p = 1;
  for (std::size_t t = 0; t < s.size(); ++t) p *= kernel(s[t], o[t]);
  return p;
}

// All observation sequences of a given length over n symbols.
inline std::vector<std::vector<int>> all_words(int n, int len) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(len, 0);
  while (true) {
    out.push_back(cur);
    int k = len - 1;
    while (k >= 0 && ++cur[k] == n) cur[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

// B(s | o) from the full joint over (s, policy, o): mixture of policies with weights w.
// Returns a map from observation word to a vector over seqs; words with zero mass are skipped.
inline std::map<std::vector<int>, Vec> joint_posterior(const Mdp& m, const Mat& kernel, const std::vector<Mat>& pis,
                                                       const std::vector<double>& w,
                                                       const std::vector<StateSequence>& seqs) {
  std::map<std::vector<int>, Vec> out;
  for (const auto& o : all_words(static_cast<int>(kernel.cols()), m.horizon + 1)) {
    Vec v = Vec::Zero(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i)
      for (std::size_t k = 0; k < pis.size(); ++k) v(i) += w[k] * path_prob(m, pis[k], seqs[i]) * obs_prob(kernel, seqs[i], o);
    const double z = v.sum();
    if (z <= 0) continue;
    out[o] = v / z;
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Mat random_stochastic(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
    m.row(r) /= m.row(r).sum();
  }
  return m;
}

// Entry-by-entry Kronecker square.
inline Mat kron_loops(const Mat& a) {
  Mat k(a.rows() * a.rows(), a.cols() * a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.rows(); ++j)
      for (Eigen::Index p = 0; p < a.cols(); ++p)
        for (Eigen::Index q = 0; q < a.cols(); ++q) k(i * a.rows() + j, p * a.cols() + q) = a(i, p) * a(j, q);
  return k;
}

struct DilemmaCount {
  int pairs = 0;  // (obs-optimal only, true-optimal only) cross pairs
  int bad = 0;    // pairs that are neither deceptive inflation nor overjustification
};

// Optimal sets over every stationary deterministic action map, compared pair by pair.
inline DilemmaCount dilemma_counterexamples(const Mdp& m, const std::vector<StateSequence>& seqs, const Vec& g,
                                            const Vec& go) {
  struct M {
    double j, jo, ep, em;
  };
  std::vector<M> ms;
  for (const auto& acts : all_action_maps(m.num_states(), m.num_actions())) {
    const Mat pi = one_hot_policy(m.num_states(), m.num_actions(), acts);
    M x{0, 0, 0, 0};
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const double p = path_prob(m, pi, seqs[i]);
      x.j += p * g(i);
      x.jo += p * go(i);
      x.ep += p * std::max(0.0, go(i) - g(i));
      x.em += p * std::max(0.0, g(i) - go(i));
    }
    ms.push_back(x);
  }
  double bj = -1e300, bo = -1e300;
  for (const M& x : ms) {
    bj = std::max(bj, x.j);
    bo = std::max(bo, x.jo);
  }
  const double tol = 1e-10;
  DilemmaCount c;
  for (const M& a : ms) {
    if (!(a.jo >= bo - tol && a.j < bj - tol)) continue;  // obs-optimal, not optimal
    for (const M& r : ms) {
      if (!(r.j >= bj - tol && r.jo < bo - tol)) continue;  // optimal, not obs-optimal
      ++c.pairs;
      const bool di = a.ep > r.ep + tol && a.jo > r.jo + tol;
      const bool oj = a.em < r.em - tol && a.j < r.j - tol;
      if (!di && !oj) ++c.bad;
    }
  }
  return c;
}

}  // namespace oracle
