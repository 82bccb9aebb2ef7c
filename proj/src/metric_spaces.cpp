#include "msir/metric_spaces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "msir/dense_linalg.hpp"
#include "msir/errors.hpp"
#include "msir/simd/kernels.hpp"

namespace msir {
namespace {

constexpr std::array<std::pair<MetricKind, std::string_view>, 10> kMetricIds{{
    {MetricKind::euclidean, "euclidean"},
    {MetricKind::torus_geodesic, "torus_geodesic"},
    {MetricKind::arc_length, "arc_length"},
    {MetricKind::hamming, "hamming"},
    {MetricKind::spd_affine, "spd_affine"},
    {MetricKind::spd_log_euclidean, "spd_log_euclidean"},
    {MetricKind::spd_s_divergence, "spd_s_divergence"},
    {MetricKind::spd_sym_kl, "spd_sym_kl"},
    {MetricKind::spd_frobenius, "spd_frobenius"},
    {MetricKind::spd_pearson, "spd_pearson"},
}};

constexpr std::array<std::pair<SpaceTag, std::string_view>, 4> kTagIds{{
    {SpaceTag::euclidean, "euclidean"},
    {SpaceTag::torus_unit_square, "torus-unit-square"},
    {SpaceTag::unit_sphere, "unit-sphere"},
    {SpaceTag::binary, "binary"},
}};

double frob_distance(const Matrix& a, const Matrix& b) {
  return std::sqrt(simd::squared_distance(a.data(), b.data(), a.values().size()));
}

// tr(A^{-1} B) from the Cholesky factor of A.
double trace_inverse_product(const Matrix& a, const Matrix& b) {
  return trace(linalg::cholesky_solve(linalg::cholesky(a), b));
}

}  // namespace

std::string_view to_string(SpaceTag tag) {
  for (const auto& [t, id] : kTagIds)
    if (t == tag) return id;
  return "unknown";
}

std::optional<SpaceTag> parse_space_tag(std::string_view id) {
  for (const auto& [t, name] : kTagIds)
    if (name == id) return t;
  return std::nullopt;
}

VectorPoint::VectorPoint(std::vector<double> coords, SpaceTag tag) : coords_(std::move(coords)), tag_(tag) {
  if (coords_.empty()) throw DataError("vector point has no coordinates");
  for (double v : coords_)
    if (!std::isfinite(v)) throw DataError("vector point has a non-finite coordinate");
  switch (tag_) {
    case SpaceTag::euclidean:
      break;
    case SpaceTag::torus_unit_square:
      for (double v : coords_)
        if (v < 0.0 || v > 1.0) throw DataError("torus point coordinate outside [0,1]");
      break;
    case SpaceTag::unit_sphere: {
      const double norm = std::sqrt(simd::dot(coords_.data(), coords_.data(), coords_.size()));
      if (std::abs(norm - 1.0) > 1e-9) throw DataError("unit-sphere point does not have unit norm");
      break;
    }
    case SpaceTag::binary:
      for (double v : coords_)
        if (v != 0.0 && v != 1.0) throw DataError("binary point has an entry outside {0,1}");
      break;
  }
}

SpdPoint::SpdPoint(Matrix m) : m_(std::move(m)) {
  if (!m_.square() || m_.empty()) throw DataError("SPD point must be a nonempty square matrix");
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = i + 1; j < m_.cols(); ++j) {
      const double a = m_(i, j);
      const double b = m_(j, i);
      if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a))) throw DataError("SPD point is not symmetric");
    }
  linalg::cholesky(m_);  // throws on a non-positive pivot
}

std::string_view to_string(MetricKind kind) {
  for (const auto& [k, id] : kMetricIds)
    if (k == kind) return id;
  return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view id) {
  for (const auto& [k, name] : kMetricIds)
    if (name == id) return k;
  return std::nullopt;
}

bool is_spd_metric(MetricKind kind) {
  switch (kind) {
    case MetricKind::euclidean:
    case MetricKind::torus_geodesic:
    case MetricKind::arc_length:
    case MetricKind::hamming:
      return false;
    default:
      return true;
  }
}

bool is_true_metric(MetricKind kind) {
  return kind != MetricKind::spd_s_divergence && kind != MetricKind::spd_sym_kl;
}

SpaceTag expected_tag(MetricKind kind) {
  switch (kind) {
    case MetricKind::torus_geodesic:
      return SpaceTag::torus_unit_square;
    case MetricKind::arc_length:
      return SpaceTag::unit_sphere;
    case MetricKind::hamming:
      return SpaceTag::binary;
    default:
      return SpaceTag::euclidean;
  }
}

double vector_distance(MetricKind kind, const VectorPoint& x, const VectorPoint& y) {
  if (is_spd_metric(kind)) throw DataError("vector_distance: " + std::string(to_string(kind)) + " is an SPD metric");
  if (x.size() != y.size()) throw DataError("vector_distance: dimension mismatch");
  if (x.tag() != y.tag()) throw DataError("vector_distance: points live in different spaces");
  if (kind != MetricKind::euclidean && x.tag() != expected_tag(kind))
    throw DataError("vector_distance: " + std::string(to_string(kind)) + " requires " +
                    std::string(to_string(expected_tag(kind))) + " points");

  const auto& a = x.coords();
  const auto& b = y.coords();
  const std::size_t n = a.size();
  switch (kind) {
    case MetricKind::euclidean:
      return std::sqrt(simd::squared_distance(a.data(), b.data(), n));
    case MetricKind::torus_geodesic: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(a[i] - b[i]);
        const double w = std::min(d, 1.0 - d);
        s += w * w;
      }
      return std::sqrt(s);
    }
    case MetricKind::arc_length: {
      // acos(<a,b>) in half-angle form.
      const double diff = std::sqrt(simd::squared_distance(a.data(), b.data(), n));
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += (a[i] + b[i]) * (a[i] + b[i]);
      return 2.0 * std::atan2(diff, std::sqrt(sum));
    }
    case MetricKind::hamming: {
      double count = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (a[i] != b[i]) count += 1.0;
      return count;
    }
    default:
      break;
  }
  throw DataError("vector_distance: unsupported metric");
}

double spd_distance(MetricKind kind, const SpdPoint& p1, const SpdPoint& p2, const MetricOptions& options) {
  if (!is_spd_metric(kind)) throw DataError("spd_distance: " + std::string(to_string(kind)) + " is a vector metric");
  if (p1.dim() != p2.dim()) throw DataError("spd_distance: size mismatch");
  const Matrix& m1 = p1.matrix();
  const Matrix& m2 = p2.matrix();
  const double p = static_cast<double>(p1.dim());

  switch (kind) {
    case MetricKind::spd_affine: {
      // ||Log(M1^{-1/2} M2 M1^{-1/2})||_F = sqrt(sum log^2 of its eigenvalues)
      const Matrix w = linalg::spd_inverse_sqrt(m1);
      const Matrix c = symmetrized(w * m2 * w);
      double s = 0.0;
      for (double lambda : linalg::spd_eigenvalues(c)) {
        const double l = std::log(lambda);
        s += l * l;
      }
      return std::sqrt(s);
    }
    case MetricKind::spd_log_euclidean:
      return frob_distance(linalg::spd_matrix_log(m1), linalg::spd_matrix_log(m2));
    case MetricKind::spd_s_divergence: {
      const Matrix mid = 0.5 * (m1 + m2);
      const double v = linalg::logdet_spd(mid) - 0.5 * (linalg::logdet_spd(m1) + linalg::logdet_spd(m2));
      return std::max(v, 0.0);
    }
    case MetricKind::spd_sym_kl: {
      const double ld1 = linalg::logdet_spd(m1);
      const double ld2 = linalg::logdet_spd(m2);
      const double h12 = 0.5 * (trace_inverse_product(m1, m2) + ld1 - ld2);
      const double h21 = 0.5 * (trace_inverse_product(m2, m1) + ld2 - ld1);
      const double v = 0.5 * (h12 + h21);
      return options.kl_centered ? std::max(v - 0.5 * p, 0.0) : v;
    }
    case MetricKind::spd_frobenius:
      return frob_distance(m1, m2);
    case MetricKind::spd_pearson: {
      const Matrix a = (1.0 / frobenius_norm(m1)) * m1;
      const Matrix b = (1.0 / frobenius_norm(m2)) * m2;
      return frob_distance(a, b);
    }
    default:
      break;
  }
  throw DataError("spd_distance: unsupported metric");
}

double distance(MetricKind kind, const Point& x, const Point& y, const MetricOptions& options) {
  if (is_spd_metric(kind)) {
    const auto* a = std::get_if<SpdPoint>(&x);
    const auto* b = std::get_if<SpdPoint>(&y);
    if (!a || !b) throw DataError(std::string(to_string(kind)) + " requires SPD matrix points");
    return spd_distance(kind, *a, *b, options);
  }
  const auto* a = std::get_if<VectorPoint>(&x);
  const auto* b = std::get_if<VectorPoint>(&y);
  if (!a || !b) throw DataError(std::string(to_string(kind)) + " requires vector points");
  return vector_distance(kind, *a, *b);
}

void check_compatible(MetricKind kind, const Point& p) {
  if (is_spd_metric(kind)) {
    if (!std::holds_alternative<SpdPoint>(p))
      throw DataError(std::string(to_string(kind)) + " requires SPD matrix points");
    return;
  }
  const auto* v = std::get_if<VectorPoint>(&p);
  if (!v) throw DataError(std::string(to_string(kind)) + " requires vector points");
  if (kind != MetricKind::euclidean && v->tag() != expected_tag(kind))
    throw DataError(std::string(to_string(kind)) + " requires " + std::string(to_string(expected_tag(kind))) +
                    " points");
}

}  // namespace msir
