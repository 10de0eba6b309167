#include "porlhf/observability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace porlhf {

bool ObservationModel::deterministic() const {
  for (Eigen::Index s = 0; s < kernel.rows(); ++s) {
    int ones = 0;
    for (Eigen::Index o = 0; o < kernel.cols(); ++o) {
      const double v = kernel(s, o);
      if (v == 1.0) ++ones;
      else if (v != 0.0) return false;
    }
    if (ones != 1) return false;
  }
  return true;
}

std::vector<int> ObservationModel::observation_map() const {
  if (!deterministic()) throw std::invalid_argument("observation kernel is not deterministic");
  std::vector<int> m(kernel.rows());
  for (Eigen::Index s = 0; s < kernel.rows(); ++s) {
    Eigen::Index o;
    kernel.row(s).maxCoeff(&o);
    m[s] = static_cast<int>(o);
  }
  return m;
}

void ObservationModel::validate(int num_states) const {
  if (kernel.rows() != num_states) throw std::invalid_argument("state without observation row");
  if (kernel.cols() != num_observations()) throw std::invalid_argument("observation kernel has wrong width");
  for (Eigen::Index s = 0; s < kernel.rows(); ++s) {
    if ((kernel.row(s).array() < 0.0).any()) throw std::invalid_argument("negative observation probability");
    if (std::fabs(kernel.row(s).sum() - 1.0) > 1e-12) throw std::invalid_argument("observation row does not sum to 1");
  }
}

ObservationModel deterministic_observations(std::vector<std::string> names, const std::vector<int>& map) {
  ObservationModel m;
  m.observations = std::move(names);
  m.kernel = Mat::Zero(static_cast<Eigen::Index>(map.size()), m.num_observations());
  for (std::size_t s = 0; s < map.size(); ++s) {
    if (map[s] < 0 || map[s] >= m.num_observations()) throw std::invalid_argument("observation index out of range");
    m.kernel(static_cast<Eigen::Index>(s), map[s]) = 1.0;
  }
  return m;
}

ObservationModel identity_observations(const Mdp& mdp) {
  std::vector<int> map(mdp.num_states());
  for (int s = 0; s < mdp.num_states(); ++s) map[s] = s;
  return deterministic_observations(mdp.states, map);
}

int ObservationSequenceSpace::index_of(const ObservationSequence& o) const {
  auto it = std::lower_bound(sequences.begin(), sequences.end(), o);
  if (it == sequences.end() || *it != o) return -1;
  return static_cast<int>(it - sequences.begin());
}

ObservationSequenceSpace build_observation_space(const ObservationModel& obs, const std::vector<StateSequence>& seqs) {
  std::map<ObservationSequence, std::vector<std::pair<int, double>>> cols;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const StateSequence& sq = seqs[i];
    for (int s : sq)
      if (s < 0 || s >= obs.kernel.rows()) throw std::invalid_argument("state without observation row");
    ObservationSequence cur;
    std::function<void(double)> rec = [&](double pr) {
      const std::size_t t = cur.size();
      if (t == sq.size()) {
        cols[cur].push_back({static_cast<int>(i), pr});
        return;
      }
      for (int o = 0; o < obs.num_observations(); ++o) {
        const double po = obs.kernel(sq[t], o);
        if (po <= 0.0) continue;
        cur.push_back(o);
        rec(pr * po);
        cur.pop_back();
      }
    };
    rec(1.0);
  }
  ObservationSequenceSpace space;
  space.kernel = Mat::Zero(static_cast<Eigen::Index>(seqs.size()), static_cast<Eigen::Index>(cols.size()));
  int j = 0;
  for (auto& [o, entries] : cols) {
    space.sequences.push_back(o);
    for (auto [i, pr] : entries) space.kernel(i, j) = pr;
    ++j;
  }
  if (obs.deterministic() && !seqs.empty()) {
    space.sequence_map.resize(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      Eigen::Index c;
      space.kernel.row(static_cast<Eigen::Index>(i)).maxCoeff(&c);
      space.sequence_map[i] = static_cast<int>(c);
    }
  }
  return space;
}

std::string observation_sequence_name(const ObservationModel& obs, const ObservationSequence& o) {
  std::string s;
  for (int i : o) s += obs.observations[i];
  return s;
}

Mat ungrounding_operator(const ObservationSequenceSpace& space) { return space.kernel; }

Mat kronecker_square(const Mat& theta, std::size_t cap) {
  const double entries = static_cast<double>(theta.rows()) * theta.rows() * theta.cols() * theta.cols();
  if (entries > static_cast<double>(cap)) throw std::length_error("Kronecker square exceeds the entry cap");
  return Eigen::kroneckerProduct(theta, theta).eval();
}

Mat kronecker_square_apply(const Mat& theta, const Mat& p) {
  if (p.rows() != theta.cols() || p.cols() != theta.cols()) throw std::invalid_argument("table shape mismatch");
  return theta * p * theta.transpose();
}

InjectivityResult injectivity(const Mat& m, double tol) {
  if (m.size() == 0) throw std::invalid_argument("empty matrix");
  InjectivityResult r;
  r.rank = numeric_rank(m, tol);
  r.injective = r.rank == m.cols();
  return r;
}

}  // namespace porlhf
