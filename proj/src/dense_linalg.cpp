#include "msir/dense_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msir/errors.hpp"
#include "msir/simd/kernels.hpp"

namespace msir::linalg {
namespace {

void require_square(const Matrix& a, const char* what) {
  if (!a.square() || a.empty()) throw DataError(std::string(what) + ": matrix must be square and nonempty");
}

void require_finite(const Matrix& a, const char* what) {
  for (double v : a.values())
    if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite entry");
}

void orient_columns(Matrix& v) {
  const std::size_t n = v.rows();
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(v(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (v(best, j) < 0.0)
      for (std::size_t i = 0; i < n; ++i) v(i, j) = -v(i, j);
  }
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += r[j] * r[j];
  }
  return std::sqrt(2.0 * s);
}

}  // namespace

EigenDecomposition sym_eigendecomposition(const Matrix& input, const JacobiOptions& options) {
  require_square(input, "sym_eigendecomposition");
  require_finite(input, "sym_eigendecomposition");
  if (asymmetry(input) > options.symmetry_tolerance)
    throw DataError("sym_eigendecomposition: matrix is not symmetric");

  const std::size_t n = input.rows();
  Matrix a = symmetrized(input);
  // Rows of vt are the eigenvectors, so the accumulation is a contiguous row rotation.
  Matrix vt = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  const double target = options.tolerance * scale;
  bool converged = scale == 0.0 || off_diagonal_norm(a) <= target;

  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300 || std::abs(apq) < 1e-18 * scale) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // Rows p and q of J^T A; columns follow from symmetry.
        simd::rotate(a.row(p).data(), a.row(q).data(), c, s, n);
        for (std::size_t k = 0; k < n; ++k) {
          a(k, p) = a(p, k);
          a(k, q) = a(q, k);
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;

        simd::rotate(vt.row(p).data(), vt.row(q).data(), c, s, n);
      }
    }
    converged = off_diagonal_norm(a) <= target;
  }
  if (!converged) throw NumericalError("sym_eigendecomposition: Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    const auto v = vt.row(order[j]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v[i];
  }
  orient_columns(out.eigenvectors);
  return out;
}

double largest_eigenvalue(const Matrix& a) {
  require_square(a, "largest_eigenvalue");
  require_finite(a, "largest_eigenvalue");
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);

  const std::size_t max_steps = std::min<std::size_t>(n, 80);
  std::vector<std::vector<double>> basis;
  basis.reserve(max_steps);
  std::vector<double> alpha;
  std::vector<double> beta;

  // Deterministic start vector with no special alignment to constants or axes.
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = 1.0 + std::sin(1.0 + 0.7548776662466927 * static_cast<double>(i));
  simd::scale(1.0 / std::sqrt(simd::dot(q.data(), q.data(), n)), q.data(), n);

  const double scale = std::max(frobenius_norm(a), 1e-300);
  double previous = 0.0;
  double estimate = 0.0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    basis.push_back(q);
    std::vector<double> w = a * std::span<const double>(q);
    alpha.push_back(simd::dot(w.data(), q.data(), n));
    // Full reorthogonalization, twice for stability.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) simd::axpy(-simd::dot(w.data(), b.data(), n), b.data(), w.data(), n);
    const double norm = std::sqrt(simd::dot(w.data(), w.data(), n));

    // Ritz values from the tridiagonal projection.
    const std::size_t k = alpha.size();
    Matrix t(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    JacobiOptions opts;
    opts.tolerance = 1e-15;
    estimate = sym_eigendecomposition(t, opts).eigenvalues.front();

    if (norm <= 1e-14 * scale) break;  // invariant subspace found
    if (step > 2 && std::abs(estimate - previous) <= 1e-15 * scale) break;
    previous = estimate;
    beta.push_back(norm);
    simd::scale(1.0 / norm, w.data(), n);
    q = std::move(w);
  }
  return estimate;
}

Matrix cholesky(const Matrix& a) {
  require_square(a, "cholesky");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* lj = l.row(j).data();
    const double pivot = a(j, j) - simd::dot(lj, lj, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw DataError("cholesky: matrix is not positive definite (pivot " + std::to_string(j) + ")");
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) l(i, j) = (a(i, j) - simd::dot(l.row(i).data(), lj, j)) / ljj;
  }
  return l;
}

Matrix cholesky_solve(const Matrix& l, const Matrix& b) {
  const std::size_t n = l.rows();
  if (b.rows() != n) throw DataError("cholesky_solve: right-hand side has wrong row count");
  const std::size_t m = b.cols();
  Matrix x = b;
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.row(i).data();
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik != 0.0) simd::axpy(-lik, x.row(k).data(), xi, m);
    }
    simd::scale(1.0 / l(i, i), xi, m);
  }
  for (std::size_t i = n; i-- > 0;) {
    double* xi = x.row(i).data();
    for (std::size_t k = i + 1; k < n; ++k) {
      const double lki = l(k, i);
      if (lki != 0.0) simd::axpy(-lki, x.row(k).data(), xi, m);
    }
    simd::scale(1.0 / l(i, i), xi, m);
  }
  return x;
}

Matrix ridge_inverse_apply(const Matrix& g, double tau, const Matrix& b) {
  require_square(g, "ridge_inverse_apply");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DataError("ridge_inverse_apply: tau must be positive");
  if (b.rows() != g.rows()) throw DataError("ridge_inverse_apply: dimension mismatch");
  const std::size_t n = g.rows();
  Matrix shifted = g;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) += tau;
  try {
    return cholesky_solve(cholesky(shifted), b);
  } catch (const DataError&) {
  }
  // G + tau I is indefinite (G has eigenvalues below -tau): V diag(1/(lambda + tau)) V^T B.
  const EigenDecomposition eig = sym_eigendecomposition(g);
  const double scale = std::max(std::abs(eig.eigenvalues.front()), std::abs(eig.eigenvalues.back())) + tau;
  Matrix vt_b = eig.eigenvectors.transpose() * b;
  for (std::size_t k = 0; k < n; ++k) {
    const double denom = eig.eigenvalues[k] + tau;
    if (std::abs(denom) <= 1e-12 * scale) throw NumericalError("ridge_inverse_apply: G + tau I is singular");
    simd::scale(1.0 / denom, vt_b.row(k).data(), vt_b.cols());
  }
  return eig.eigenvectors * vt_b;
}

std::vector<double> spd_eigenvalues(const Matrix& m) {
  auto values = sym_eigendecomposition(m).eigenvalues;
  const double top = values.front();
  if (!(top > 0.0) || !(values.back() > 1e-12 * top))
    throw DataError("matrix is not symmetric positive definite");
  return values;
}

Matrix spd_function(const Matrix& m, const std::function<double(double)>& f) {
  const EigenDecomposition eig = sym_eigendecomposition(m);
  const double top = eig.eigenvalues.front();
  if (!(top > 0.0) || !(eig.eigenvalues.back() > 1e-12 * top))
    throw DataError("matrix is not symmetric positive definite");
  const std::size_t n = m.rows();
  Matrix scaled = eig.eigenvectors;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= f(eig.eigenvalues[j]);
  return symmetrized(multiply_transposed(scaled, eig.eigenvectors));
}

Matrix spd_matrix_log(const Matrix& m) {
  return spd_function(m, [](double x) { return std::log(x); });
}

Matrix spd_matrix_exp_of_symmetric(const Matrix& s) {
  const EigenDecomposition eig = sym_eigendecomposition(s);
  Matrix scaled = eig.eigenvectors;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) scaled(i, j) *= std::exp(eig.eigenvalues[j]);
  return symmetrized(multiply_transposed(scaled, eig.eigenvectors));
}

Matrix spd_inverse_sqrt(const Matrix& m) {
  return spd_function(m, [](double x) { return 1.0 / std::sqrt(x); });
}

double logdet_spd(const Matrix& m) {
  const Matrix l = cholesky(m);
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

}  // namespace msir::linalg
