#include "porlhf/linalg.hpp"

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace porlhf {

namespace {

struct Svd {
  Vec sigma;
  Mat u;
  Mat v;
};

Svd full_svd(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

int rank_from(const Vec& sigma, double tol) {
  if (sigma.size() == 0) return 0;
  const double top = sigma(0);
  if (top == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tol * top) ++r;
  return r;
}

// Best rational approximation by continued fractions.
mpq_class snap(double x, long max_den) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite entry in exact rank");
  const bool neg = x < 0;
  double a = std::fabs(x);
  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(a);
    const mpz_class ai = static_cast<long>(fl);
    const mpz_class p2 = ai * p1 + p0;
    const mpz_class q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = a - fl;
    if (frac < 1e-15) break;
    a = 1.0 / frac;
  }
  if (q1 == 0) return mpq_class(0);
  mpq_class r(p1, q1);
  r.canonicalize();
  return neg ? mpq_class(-r) : r;
}

}  // namespace

int numeric_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(m);
  return rank_from(svd.singularValues(), tol);
}

Mat nullspace(const Mat& m, double tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Mat::Identity(n, n);
  if (n == 0) return Mat(0, 0);
  const Svd s = full_svd(m);
  const int r = rank_from(s.sigma, tol);
  return s.v.rightCols(n - r);
}

Mat column_space(const Mat& m, double tol) {
  if (m.size() == 0) return Mat(m.rows(), 0);
  const Svd s = full_svd(m);
  const int r = rank_from(s.sigma, tol);
  return s.u.leftCols(r);
}

Mat column_space_above(const Mat& m, double threshold) {
  if (m.size() == 0) return Mat(m.rows(), 0);
  const Svd s = full_svd(m);
  int r = 0;
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i)
    if (s.sigma(i) > threshold) ++r;
  return s.u.leftCols(r);
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

int exact_rank(const Mat& m, long max_denominator) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  std::vector<std::vector<mpq_class>> a(rows, std::vector<mpq_class>(cols));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a[i][j] = snap(m(i, j), max_denominator);
  int rank = 0;
  for (Eigen::Index c = 0; c < cols && rank < rows; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index r = rank; r < rows; ++r)
      if (a[r][c] != 0) { piv = r; break; }
    if (piv < 0) continue;
    std::swap(a[rank], a[piv]);
    for (Eigen::Index r = rank + 1; r < rows; ++r) {
      if (a[r][c] == 0) continue;
      const mpq_class f = a[r][c] / a[rank][c];
      for (Eigen::Index k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace porlhf
