#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "msir/matrix.hpp"
#include "msir/metric_spaces.hpp"

namespace msir::testing {

inline std::mt19937_64& engine() {
  static std::mt19937_64 e(20240611);
  return e;
}

inline double uniform(double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(engine());
}

inline double gauss() { return std::normal_distribution<double>(0.0, 1.0)(engine()); }

inline Matrix random_matrix(std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = gauss();
  return m;
}

inline Matrix random_symmetric(std::size_t n) {
  Matrix a = random_matrix(n, n);
  return symmetrized(a);
}

// B B^T / n + shift I
inline Matrix random_spd(std::size_t n, double shift = 0.5) {
  Matrix b = random_matrix(n, n);
  Matrix m = (1.0 / static_cast<double>(n)) * multiply_transposed(b, b);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += shift;
  return symmetrized(m);
}

// Orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
inline Matrix random_orthogonal(std::size_t n) {
  Matrix a = random_matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += a(i, j) * a(i, k);
      for (std::size_t i = 0; i < n; ++i) a(i, j) -= d * a(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) a(i, j) /= norm;
  }
  return a;
}

// Gauss-Jordan inverse with partial pivoting; independent of the Cholesky and
// Jacobi code paths under test.
inline Matrix gauss_jordan_inverse(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix m = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(m(c, j), m(piv, j));
      std::swap(inv(c, j), inv(piv, j));
    }
    const double d = m(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      m(c, j) /= d;
      inv(c, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        m(r, j) -= f * m(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

// Plain triple loop, no SIMD kernels.
inline Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline Matrix centering_matrix(std::size_t n) {
  Matrix q = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) -= 1.0 / static_cast<double>(n);
  return q;
}

inline Matrix shifted(const Matrix& g, double tau) {
  Matrix m = g;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += tau;
  return m;
}

// (G_X + t1 I)^{-1} G_Y (G_Y + t2 I)^{-1} G_X with explicit inverses.
inline Matrix oracle_coordinate(const Matrix& gx, const Matrix& gy, double t1, double t2) {
  const Matrix a = gauss_jordan_inverse(shifted(gx, t1));
  const Matrix b = gauss_jordan_inverse(shifted(gy, t2));
  return naive_product(naive_product(naive_product(a, gy), b), gx);
}

// (G_X + t1 I)^{-1} Q (sum_k 1_k 1_k^T / n_k) Q G_X for labels in any range.
inline Matrix oracle_discrete(const Matrix& gx, const std::vector<int>& labels, double t1) {
  const std::size_t n = labels.size();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] != labels[j]) continue;
      double nk = 0.0;
      for (int l : labels) nk += l == labels[i] ? 1.0 : 0.0;
      s(i, j) = 1.0 / nk;
    }
  const Matrix q = centering_matrix(n);
  const Matrix a = gauss_jordan_inverse(shifted(gx, t1));
  return naive_product(naive_product(naive_product(naive_product(a, q), s), q), gx);
}

// Random centered Gram matrix of n points in the plane with a Gaussian kernel.
inline Matrix random_centered_gram(std::size_t n) {
  Matrix k(n, n);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = gauss();
    y[i] = gauss();
  }
  const double gamma = uniform(0.2, 2.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = (x[i] - x[j]) * (x[i] - x[j]) + (y[i] - y[j]) * (y[i] - y[j]);
      k(i, j) = std::exp(-gamma * d2);
    }
  const Matrix q = centering_matrix(n);
  return symmetrized(naive_product(naive_product(q, k), q));
}

// Largest eigenvalue by power iteration on a PSD matrix.
inline double power_top_eigenvalue(const Matrix& a) {
  std::vector<double> v(a.rows(), 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.01 * static_cast<double>(i);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> w(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) w[i] += a(i, j) * v[j];
    double nrm = 0.0;
    for (double x : w) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nrm;
    if (std::abs(nrm - lambda) <= 1e-15 * nrm) return nrm;
    lambda = nrm;
  }
  return lambda;
}

// A random valid point for the given metric. Vector metrics use dimension
// `dim`; SPD metrics use dim x dim matrices.
inline Point random_point(MetricKind kind, std::size_t dim) {
  if (is_spd_metric(kind)) return SpdPoint(random_spd(dim, 0.3));
  std::vector<double> c(dim);
  switch (kind) {
    case MetricKind::torus_geodesic:
      for (double& x : c) x = uniform();
      return VectorPoint(c, SpaceTag::torus_unit_square);
    case MetricKind::arc_length: {
      double s = 0.0;
      for (double& x : c) {
        x = gauss();
        s += x * x;
      }
      for (double& x : c) x /= std::sqrt(s);
      return VectorPoint(c, SpaceTag::unit_sphere);
    }
    case MetricKind::hamming:
      for (double& x : c) x = uniform() < 0.5 ? 0.0 : 1.0;
      return VectorPoint(c, SpaceTag::binary);
    default:
      for (double& x : c) x = gauss();
      return VectorPoint(c, SpaceTag::euclidean);
  }
}

inline const std::vector<MetricKind>& all_metrics() {
  static const std::vector<MetricKind> kinds = {
      MetricKind::euclidean,       MetricKind::torus_geodesic,    MetricKind::arc_length,
      MetricKind::hamming,         MetricKind::spd_affine,        MetricKind::spd_log_euclidean,
      MetricKind::spd_s_divergence, MetricKind::spd_sym_kl,       MetricKind::spd_frobenius,
      MetricKind::spd_pearson};
  return kinds;
}

}  // namespace msir::testing
