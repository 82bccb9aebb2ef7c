#include "msir/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msir/dense_linalg.hpp"
#include "msir/errors.hpp"
#include "msir/rng.hpp"

namespace msir {

std::size_t response_size(const Response& y) {
  return std::visit([](const auto& v) { return v.size(); }, y);
}

void validate(const Dataset& d) {
  if (d.x.empty()) throw DataError("dataset is empty");
  if (response_size(d.y) != d.x.size()) throw DataError("dataset: predictor and response counts differ");
  const std::size_t kind = d.x.front().index();
  for (const Point& p : d.x)
    if (p.index() != kind) throw DataError("dataset: predictors mix payload types");
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.x.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= d.size()) throw DataError("subset: row index out of range");
    out.x.push_back(d.x[r]);
  }
  out.y = std::visit(
      [&](const auto& v) -> Response {
        std::decay_t<decltype(v)> picked;
        picked.reserve(rows.size());
        for (std::size_t r : rows) picked.push_back(v[r]);
        return picked;
      },
      d.y);
  return out;
}

std::vector<double> torus_anchor(int model_id) {
  switch (model_id) {
    case 1:
      return {0.5, 0.5};
    case 2:
      return {1.0, 1.0};
    default:
      throw DataError("torus model id must be 1 or 2, got " + std::to_string(model_id));
  }
}

double torus_response(int model_id, const VectorPoint& x, double noise) {
  const VectorPoint anchor(torus_anchor(model_id), SpaceTag::torus_unit_square);
  return vector_distance(MetricKind::torus_geodesic, x, anchor) + noise;
}

Dataset generate_torus_dataset(int model_id, std::size_t n, double sigma, std::uint64_t seed, std::uint64_t stream) {
  torus_anchor(model_id);
  if (n < 1) throw DataError("torus dataset: n must be at least 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DataError("torus dataset: sigma must be nonnegative");
  CounterRng rng(seed, stream);
  Dataset d;
  ScalarResponse y;
  d.x.reserve(n);
  y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform();
    const double x2 = rng.uniform();
    VectorPoint p({x1, x2}, SpaceTag::torus_unit_square);
    y.push_back(torus_response(model_id, p, sigma * rng.normal()));
    d.x.emplace_back(std::move(p));
  }
  d.y = std::move(y);
  return d;
}

Dataset generate_spd_dataset(std::size_t n, std::size_t p, std::size_t classes, double separation,
                             std::uint64_t seed) {
  if (n < 1 || p < 1) throw DataError("spd dataset: n and p must be positive");
  if (classes < 1) throw DataError("spd dataset: need at least one class");
  if (!(separation > 0.0)) throw DataError("spd dataset: separation must be positive");
  CounterRng rng(seed);
  Dataset d;
  LabelResponse labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % classes + 1;
    Matrix b(p, p);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < p; ++c) b(r, c) = rng.normal();
    Matrix m = (1.0 / static_cast<double>(p)) * multiply_transposed(b, b);
    for (std::size_t r = 0; r < p; ++r) m(r, r) += 1.0 + static_cast<double>(k) * separation;
    d.x.emplace_back(SpdPoint(symmetrized(m)));
    labels.push_back(static_cast<int>(k));
  }
  d.y = std::move(labels);
  return d;
}

Dataset generate_composition_dataset(std::size_t n, std::size_t p, std::size_t support_size, std::size_t classes,
                                     std::uint64_t seed) {
  if (p < 1 || support_size < 1 || support_size > p)
    throw DataError("composition dataset: support_size must be in [1, p]");
  if (classes < 1) throw DataError("composition dataset: need at least one class");
  CounterRng rng(seed);
  const std::size_t block = std::max<std::size_t>(1, p / classes);
  Dataset d;
  LabelResponse labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % classes + 1;
    const std::size_t lo = std::min(p - 1, (k - 1) * block);
    const std::size_t hi = std::min(p, lo + block);
    std::vector<double> weight(p, 1.0);
    for (std::size_t j = lo; j < hi; ++j) weight[j] = 4.0;

    std::vector<double> v(p, 0.0);
    for (std::size_t s = 0; s < support_size; ++s) {
      double total = 0.0;
      for (double w : weight) total += w;
      double target = rng.uniform() * total;
      std::size_t pick = 0;
      for (; pick < p; ++pick) {
        if (weight[pick] == 0.0) continue;
        if (target < weight[pick]) break;
        target -= weight[pick];
      }
      if (pick == p)  // rounding at the top end
        for (pick = p; pick-- > 0;)
          if (weight[pick] > 0.0) break;
      weight[pick] = 0.0;
      v[pick] = -std::log(rng.uniform_open());
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    for (double& x : v) x /= sum;
    d.x.emplace_back(VectorPoint(std::move(v), SpaceTag::euclidean));
    labels.push_back(static_cast<int>(k));
  }
  d.y = std::move(labels);
  return d;
}

VectorPoint sqrt_compositional_map(std::span<const double> v) {
  if (v.empty()) throw DataError("composition is empty");
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0)) throw DataError("composition has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-8) throw DataError("composition does not sum to one");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::sqrt(v[i] / sum);
  return VectorPoint(std::move(out), SpaceTag::unit_sphere);
}

VectorPoint dichotomize(std::span<const double> v, double threshold) {
  if (v.empty()) throw DataError("cannot dichotomize an empty vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]) > threshold ? 1.0 : 0.0;
  return VectorPoint(std::move(out), SpaceTag::binary);
}

std::vector<SpdPoint> spd_common_projection(std::span<const SpdPoint> matrices, std::size_t m, double floor) {
  if (matrices.empty()) throw DataError("spd_common_projection: no matrices");
  if (!(floor > 0.0)) throw DataError("spd_common_projection: floor must be positive");
  const std::size_t p = matrices.front().dim();
  if (m < 1 || m > p) throw DataError("spd_common_projection: m must be in [1, p]");

  Matrix mean(p, p);
  for (const SpdPoint& s : matrices) {
    if (s.dim() != p) throw DataError("spd_common_projection: matrices differ in size");
    mean = mean + s.matrix();
  }
  mean = (1.0 / static_cast<double>(matrices.size())) * mean;
  const linalg::EigenDecomposition eig = linalg::sym_eigendecomposition(symmetrized(mean));
  Matrix v(p, m);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < m; ++j) v(i, j) = eig.eigenvectors(i, j);
  const Matrix vt = v.transpose();

  std::vector<SpdPoint> out;
  out.reserve(matrices.size());
  for (const SpdPoint& s : matrices) {
    const Matrix proj = symmetrized(vt * s.matrix() * v);
    const linalg::EigenDecomposition pe = linalg::sym_eigendecomposition(proj);
    Matrix scaled = pe.eigenvectors;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) scaled(i, j) *= std::max(pe.eigenvalues[j], floor);
    out.emplace_back(symmetrized(multiply_transposed(scaled, pe.eigenvectors)));
  }
  return out;
}

}  // namespace msir
