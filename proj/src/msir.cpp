#include "msir/msir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <thread>

#include "msir/dense_linalg.hpp"
#include "msir/errors.hpp"
#include "msir/rng.hpp"
#include "msir/simd/kernels.hpp"

namespace msir {
namespace {

constexpr std::uint64_t kPartitionStream = 0x7061727469ULL;

double resolve_gamma(const Bandwidth& bw, const Matrix& distances) {
  if (bw.value) {
    if (!(*bw.value > 0.0) || !std::isfinite(*bw.value)) throw DataError("bandwidth gamma must be positive");
    return *bw.value;
  }
  if (!(bw.median_scale > 0.0)) throw DataError("bandwidth median scale must be positive");
  return bw.median_scale * median_heuristic_from_distances(distances);
}

GramPair build_gram(std::span<const Point> points, MetricKind metric, const Bandwidth& bw,
                    const MetricOptions& options, unsigned workers) {
  const Matrix d = pairwise_distances(points, metric, options, workers);
  GramPair g;
  g.config = KernelConfig{resolve_gamma(bw, d), metric, options};
  g.K = kernel_from_distances(d, g.config.gamma);
  g.G = center_gram(g.K);
  g.n = points.size();
  return g;
}

std::vector<Point> scalar_points(const ScalarResponse& y) {
  std::vector<Point> pts;
  pts.reserve(y.size());
  for (double v : y) pts.emplace_back(VectorPoint({v}, SpaceTag::euclidean));
  return pts;
}

// Eigenvectors of L = (G_X + tau I)^{-1} H G_X for symmetric PSD H. With
// A = G_X + tau I and R = G_X^{1/2} A^{-1/2}, L is similar to the symmetric R H R:
// if R H R u = lambda u then y = R u satisfies G_X A^{-1} H y = lambda y, and
// v = A^{-1} H y is an eigenvector of L with eigenvalue lambda. For lambda = 0
// the back-map v = G_X^{+1/2} A^{-1/2} u is used instead.
void coordinate_eigenvectors(const Matrix& gx, double tau1, const Matrix& h, std::size_t d,
                             std::vector<double>& values, Matrix& vectors, std::vector<double>& spectrum) {
  const std::size_t n = gx.rows();
  const linalg::EigenDecomposition ex = linalg::sym_eigendecomposition(gx);
  const double top = std::max(ex.eigenvalues.front(), 0.0);
  std::vector<double> r_diag(n);
  std::vector<double> back_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::max(ex.eigenvalues[i], 0.0);  // clip a slightly indefinite Gram
    r_diag[i] = std::sqrt(g / (g + tau1));
    back_diag[i] = g > 1e-10 * top ? 1.0 / std::sqrt(g * (g + tau1)) : 0.0;
  }
  auto u_scaled = [&](const std::vector<double>& diag) {
    Matrix m = ex.eigenvectors;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) *= diag[j];
    return multiply_transposed(m, ex.eigenvectors);
  };
  const Matrix r = symmetrized(u_scaled(r_diag));
  const linalg::EigenDecomposition es = linalg::sym_eigendecomposition(symmetrized(r * h * r));
  spectrum = es.eigenvalues;
  values.assign(es.eigenvalues.begin(), es.eigenvalues.begin() + static_cast<std::ptrdiff_t>(d));

  Matrix y(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) y(i, j) = es.eigenvectors(i, j);
  const Matrix mapped = linalg::ridge_inverse_apply(gx, tau1, h * (r * y));
  const Matrix fallback = u_scaled(back_diag) * y;
  const double floor = 1e-10 * std::max(std::abs(es.eigenvalues.front()), 1e-300);

  vectors = Matrix(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> v = std::abs(values[j]) > floor ? mapped.col(j) : fallback.col(j);
    const double norm = std::sqrt(simd::dot(v.data(), v.data(), n));
    if (norm > 0.0) simd::scale(1.0 / norm, v.data(), n);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[best])) best = i;
    const double sign = v[best] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) vectors(i, j) = sign * v[i];
  }
}

}  // namespace

void validate(const MsirConfig& config) {
  if (config.d < 1) throw DataError("target dimension d must be at least 1");
  if (!(config.ridge_c > 0.0) || !std::isfinite(config.ridge_c)) throw DataError("ridge_c must be positive");
  if (config.partitions < 1) throw DataError("partitions must be at least 1");
}

ClassSummary summarize_classes(std::span<const int> labels) {
  if (labels.empty()) throw DataError("no labels");
  std::map<int, std::size_t> index;
  for (int l : labels) index.emplace(l, 0);
  ClassSummary s;
  std::size_t k = 0;
  for (auto& [label, idx] : index) {
    idx = ++k;
    s.original.push_back(label);
  }
  s.counts.assign(k, 0);
  s.labels.reserve(labels.size());
  for (int l : labels) {
    const std::size_t c = index.at(l);
    s.labels.push_back(static_cast<int>(c));
    ++s.counts[c - 1];
  }
  return s;
}

double ridge_parameter(const Matrix& g, double c) {
  if (!(c > 0.0)) throw DataError("ridge_parameter: c must be positive");
  if (!g.square()) throw DataError("ridge_parameter: matrix must be square");
  const double phi = linalg::largest_eigenvalue(g);
  if (!(phi > 0.0)) throw NumericalError("ridge_parameter: degenerate Gram (largest eigenvalue is not positive)");
  return c * phi;
}

Matrix msir_coordinate(const Matrix& gx, const Matrix& gy, double tau1, double tau2) {
  if (!gx.square() || !gy.square() || gx.rows() != gy.rows())
    throw DataError("msir_coordinate: Gram matrices must be square and of equal size");
  if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw DataError("msir_coordinate: ridge parameters must be positive");
  const Matrix right = linalg::ridge_inverse_apply(gy, tau2, gx);
  return linalg::ridge_inverse_apply(gx, tau1, gy * right);
}

Matrix class_inner_matrix(const ClassSummary& classes) {
  const std::size_t n = classes.n();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (classes.labels[i] == classes.labels[j])
        d(i, j) = 1.0 / static_cast<double>(classes.counts[static_cast<std::size_t>(classes.labels[i]) - 1]);
  return center_gram(d);
}

std::vector<double> class_direction_coordinate(const ClassSummary& classes, std::size_t k) {
  if (k < 1 || k > classes.classes()) throw DataError("class index out of range");
  const double nk = static_cast<double>(classes.counts[k - 1]);
  const double n = static_cast<double>(classes.n());
  std::vector<double> out(classes.n());
  for (std::size_t i = 0; i < classes.n(); ++i)
    out[i] = (static_cast<std::size_t>(classes.labels[i]) == k ? 1.0 / nk : 0.0) - 1.0 / n;
  return out;
}

Matrix msir_discrete_coordinate(const Matrix& gx, const ClassSummary& classes, double tau1) {
  if (!gx.square() || gx.rows() != classes.n())
    throw DataError("msir_discrete_coordinate: dimension mismatch");
  for (std::size_t c : classes.counts)
    if (c == 0) throw DataError("msir_discrete_coordinate: empty class");
  if (!(tau1 > 0.0)) throw DataError("msir_discrete_coordinate: ridge parameter must be positive");
  return linalg::ridge_inverse_apply(gx, tau1, class_inner_matrix(classes) * gx);
}

FitDetail fit_detail(const Dataset& data, const MsirConfig& config) {
  validate(config);
  validate(data);
  const std::size_t n = data.size();
  if (n < 2) throw DataError("fit: need at least two samples");
  if (config.d > n) throw DataError("fit: d exceeds the sample size");

  FitDetail out;
  out.gram_x = build_gram(data.x, config.metric_x, config.gamma_x, config.options, config.workers);
  MsirModel& model = out.model;
  model.training_x = data.x;
  model.kernel_x = out.gram_x.config;
  model.eigen_target = config.eigen_target;
  model.tau1 = ridge_parameter(out.gram_x.G, config.ridge_c);

  Matrix h;  // symmetric middle factor, used by the coordinate eigen-target
  if (const auto* labels = std::get_if<LabelResponse>(&data.y)) {
    model.response_mode = ResponseMode::categorical;
    const ClassSummary classes = summarize_classes(*labels);
    out.coordinate = msir_discrete_coordinate(out.gram_x.G, classes, model.tau1);
    if (config.eigen_target == EigenTarget::coordinate) h = class_inner_matrix(classes);
  } else {
    model.response_mode = ResponseMode::metric;
    const auto* scalars = std::get_if<ScalarResponse>(&data.y);
    const std::vector<Point> ys = scalars ? scalar_points(*scalars) : std::get<MetricResponse>(data.y);
    out.gram_y = build_gram(ys, config.metric_y, config.gamma_y, config.options, config.workers);
    model.tau2 = ridge_parameter(out.gram_y->G, config.ridge_c);
    out.coordinate = msir_coordinate(out.gram_x.G, out.gram_y->G, model.tau1, model.tau2);
    if (config.eigen_target == EigenTarget::coordinate)
      h = symmetrized(linalg::ridge_inverse_apply(out.gram_y->G, model.tau2, out.gram_y->G));
  }

  if (config.eigen_target == EigenTarget::gram_product) {
    const linalg::EigenDecomposition eig =
        linalg::sym_eigendecomposition(symmetrized(multiply_transposed(out.coordinate, out.coordinate)));
    out.spectrum = eig.eigenvalues;
    model.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(config.d));
    model.eigenvectors = Matrix(n, config.d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < config.d; ++j) model.eigenvectors(i, j) = eig.eigenvectors(i, j);
  } else {
    coordinate_eigenvectors(out.gram_x.G, model.tau1, h, config.d, model.eigenvalues, model.eigenvectors,
                            out.spectrum);
  }
  return out;
}

MsirModel fit(const Dataset& data, const MsirConfig& config) { return fit_detail(data, config).model; }

std::vector<double> transform(const MsirModel& model, const Point& x) {
  std::vector<double> k = kernel_vector(x, model.training_x, model.kernel_x);
  const double mean = std::accumulate(k.begin(), k.end(), 0.0) / static_cast<double>(k.size());
  for (double& v : k) v -= mean;
  std::vector<double> out(model.d(), 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto vi = model.eigenvectors.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += vi[j] * k[i];
  }
  return out;
}

Matrix transform(const MsirModel& model, std::span<const Point> points) {
  Matrix out(points.size(), model.d());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = transform(model, points[i]);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

Matrix in_sample_predictors(const MsirModel& model, const Matrix& kx) {
  if (kx.rows() != model.n() || !kx.square()) throw DataError("in_sample_predictors: kernel matrix has wrong size");
  const std::size_t n = model.n();
  Matrix out(n, model.d());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> col = kx.col(i);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
    for (double& v : col) v -= mean;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < model.d(); ++j) out(i, j) += model.eigenvectors(r, j) * col[r];
  }
  return out;
}

std::vector<std::vector<int>> align_signs(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t q_count = blocks.size();
  const std::size_t rows = blocks.front().rows();
  const std::size_t d = blocks.front().cols();
  for (const Matrix& b : blocks)
    if (b.rows() != rows || b.cols() != d) throw DataError("align_signs: blocks differ in shape");

  std::vector<std::vector<int>> signs(q_count, std::vector<int>(d, 1));
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<std::vector<double>> u(q_count);
    for (std::size_t q = 0; q < q_count; ++q) u[q] = blocks[q].col(j);
    Matrix gram(q_count, q_count);
    for (std::size_t a = 0; a < q_count; ++a)
      for (std::size_t b = 0; b < q_count; ++b) gram(a, b) = simd::dot(u[a].data(), u[b].data(), rows);

    if (q_count <= 15) {
      // Bit q set means block q is flipped; block 0 is never flipped since the
      // objective is invariant to a global flip. Ascending masks make ties keep +1.
      const std::uint32_t masks = 1u << (q_count - 1);
      double best = -std::numeric_limits<double>::infinity();
      std::uint32_t best_mask = 0;
      for (std::uint32_t m = 0; m < masks; ++m) {
        const std::uint32_t mask = m << 1;
        double obj = 0.0;
        for (std::size_t a = 0; a < q_count; ++a) {
          const double sa = (mask >> a) & 1u ? -1.0 : 1.0;
          for (std::size_t b = 0; b < q_count; ++b) obj += sa * ((mask >> b) & 1u ? -1.0 : 1.0) * gram(a, b);
        }
        if (m == 0 || obj > best + 1e-12 * std::max(1.0, std::abs(best))) {
          best = obj;
          best_mask = mask;
        }
      }
      for (std::size_t q = 0; q < q_count; ++q) signs[q][j] = (best_mask >> q) & 1u ? -1 : 1;
    } else {
      std::vector<double> running = u[0];
      for (std::size_t q = 1; q < q_count; ++q) {
        const double c = simd::dot(running.data(), u[q].data(), rows);
        signs[q][j] = c < 0.0 ? -1 : 1;
        simd::axpy(static_cast<double>(signs[q][j]), u[q].data(), running.data(), rows);
      }
    }
  }
  return signs;
}

std::vector<std::vector<std::size_t>> random_partition(std::size_t n, std::size_t parts, std::uint64_t seed) {
  if (parts < 1 || parts > n) throw DataError("random_partition: invalid number of parts");
  CounterRng rng(seed, kPartitionStream);
  const std::vector<std::size_t> perm = random_permutation(n, rng);
  std::vector<std::vector<std::size_t>> blocks(parts);
  for (std::size_t q = 0; q < parts; ++q) {
    const std::size_t begin = q * n / parts;
    const std::size_t end = (q + 1) * n / parts;
    blocks[q].assign(perm.begin() + static_cast<std::ptrdiff_t>(begin), perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(blocks[q].begin(), blocks[q].end());
  }
  return blocks;
}

PartitionedFit fit_on_blocks(const Dataset& data, const MsirConfig& config,
                             std::vector<std::vector<std::size_t>> blocks) {
  validate(config);
  validate(data);
  if (blocks.empty()) throw DataError("fit_partitioned: no blocks");
  const std::size_t min_size = std::max<std::size_t>(3, config.d + 1);
  for (const auto& b : blocks)
    if (b.size() < min_size)
      throw DataError("fit_partitioned: subset of size " + std::to_string(b.size()) + " is smaller than " +
                      std::to_string(min_size));

  MsirConfig sub = config;
  sub.partitions = 1;
  const std::size_t q_count = blocks.size();
  PartitionedFit out;
  out.models.resize(q_count);
  std::vector<Matrix> full(q_count);
  auto work = [&](std::size_t q) {
    out.models[q] = fit(subset(data, blocks[q]), sub);
    full[q] = transform(out.models[q], data.x);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(q_count)));
  if (workers == 1) {
    for (std::size_t q = 0; q < q_count; ++q) work(q);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t q = w; q < q_count; q += workers) work(q);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  out.signs = align_signs(full);
  const std::size_t n = data.size();
  out.predictors = Matrix(n, config.d);
  for (std::size_t q = 0; q < q_count; ++q) {
    for (std::size_t j = 0; j < config.d; ++j) {
      const double s = static_cast<double>(out.signs[q][j]);
      for (std::size_t r = 0; r < out.models[q].n(); ++r) out.models[q].eigenvectors(r, j) *= s;
      for (std::size_t i = 0; i < n; ++i) out.predictors(i, j) += s * full[q](i, j);
    }
  }
  simd::scale(1.0 / static_cast<double>(q_count), out.predictors.data(), n * config.d);
  out.blocks = std::move(blocks);
  return out;
}

PartitionedFit fit_partitioned(const Dataset& data, const MsirConfig& config, std::uint64_t seed) {
  validate(config);
  validate(data);
  const std::size_t n = data.size();
  const std::size_t min_size = std::max<std::size_t>(3, config.d + 1);
  if (n / config.partitions < min_size)
    throw DataError("fit_partitioned: too few samples per subset (need n/Q >= " + std::to_string(min_size) + ")");
  return fit_on_blocks(data, config, random_partition(n, config.partitions, seed));
}

Matrix ensemble_transform(std::span<const MsirModel> models, std::span<const Point> points) {
  if (models.empty()) throw DataError("ensemble_transform: no models");
  Matrix acc = transform(models.front(), points);
  for (std::size_t q = 1; q < models.size(); ++q) {
    const Matrix t = transform(models[q], points);
    if (t.cols() != acc.cols()) throw DataError("ensemble_transform: members differ in dimension");
    acc = acc + t;
  }
  return (1.0 / static_cast<double>(models.size())) * acc;
}

}  // namespace msir
