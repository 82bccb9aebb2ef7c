#include "msir/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "msir/csv_io.hpp"
#include "msir/datasets.hpp"
#include "msir/dense_linalg.hpp"
#include "msir/errors.hpp"
#include "msir/kernel_gram.hpp"
#include "msir/msir.hpp"
#include "msir/rng.hpp"
#include "msir/simd/kernels.hpp"

namespace msir {
namespace {

// Double centering of the Euclidean distance matrix is Q D Q.
Matrix double_centered_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = std::sqrt(simd::squared_distance(x.row(i).data(), x.row(j).data(), x.cols()));
  return center_gram(d);
}

double mean_product(const Matrix& a, const Matrix& b) {
  return simd::dot(a.data(), b.data(), a.values().size()) / static_cast<double>(a.values().size());
}

struct ClassFit {
  std::vector<double> mean;
  Matrix chol;
  double logdet = 0.0;
  double log_prior = 0.0;
};

ClassFit fit_class(const Matrix& x, const std::vector<std::size_t>& members, std::size_t total) {
  const std::size_t d = x.cols();
  const double m = static_cast<double>(members.size());
  ClassFit f;
  f.mean.assign(d, 0.0);
  for (std::size_t i : members) simd::axpy(1.0, x.row(i).data(), f.mean.data(), d);
  simd::scale(1.0 / m, f.mean.data(), d);
  Matrix cov(d, d);
  std::vector<double> c(d);
  for (std::size_t i : members) {
    for (std::size_t a = 0; a < d; ++a) c[a] = x(i, a) - f.mean[a];
    for (std::size_t a = 0; a < d; ++a) simd::axpy(c[a], c.data(), cov.row(a).data(), d);
  }
  cov = (1.0 / (m - 1.0)) * cov;
  const double tr = trace(cov);
  if (!(tr > 0.0)) throw NumericalError("qda_loocv_error: degenerate class covariance");
  const double ridge = 1e-8 * tr / static_cast<double>(d);
  for (std::size_t a = 0; a < d; ++a) cov(a, a) += ridge;
  try {
    f.chol = linalg::cholesky(cov);
  } catch (const DataError&) {
    throw NumericalError("qda_loocv_error: degenerate class covariance after flooring");
  }
  for (std::size_t a = 0; a < d; ++a) f.logdet += 2.0 * std::log(f.chol(a, a));
  f.log_prior = std::log(m / static_cast<double>(total));
  return f;
}

double log_score(const ClassFit& f, std::span<const double> x) {
  const std::size_t d = x.size();
  // Forward substitution gives ||L^{-1}(x - mu)||^2.
  std::vector<double> z(d);
  for (std::size_t a = 0; a < d; ++a) {
    double s = x[a] - f.mean[a];
    for (std::size_t b = 0; b < a; ++b) s -= f.chol(a, b) * z[b];
    z[a] = s / f.chol(a, a);
  }
  return -0.5 * f.logdet - 0.5 * simd::dot(z.data(), z.data(), d) + f.log_prior;
}

}  // namespace

double distance_correlation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DataError("distance_correlation: sample sizes differ");
  if (a.rows() < 2) throw DataError("distance_correlation: need at least two observations");
  const Matrix da = double_centered_distances(a);
  const Matrix db = double_centered_distances(b);
  const double var_a = mean_product(da, da);
  const double var_b = mean_product(db, db);
  if (var_a <= 1e-14 || var_b <= 1e-14) return 0.0;
  const double cov = std::max(mean_product(da, db), 0.0);
  return std::clamp(std::sqrt(cov / std::sqrt(var_a * var_b)), 0.0, 1.0);
}

double qda_loocv_error(const Matrix& x, std::span<const int> labels) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (labels.size() != n) throw DataError("qda_loocv_error: label count differs from predictor rows");
  if (d < 1) throw DataError("qda_loocv_error: need at least one predictor");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
  for (const auto& [label, idx] : members)
    if (idx.size() < d + 2)
      throw DataError("qda_loocv_error: class " + std::to_string(label) + " has fewer than d + 2 members");

  // Fits on full classes, reused for every class that does not own the held-out point.
  std::map<int, ClassFit> full;
  for (const auto& [label, idx] : members) full.emplace(label, fit_class(x, idx, n - 1));

  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> rest;
    rest.reserve(members[labels[i]].size() - 1);
    for (std::size_t j : members[labels[i]])
      if (j != i) rest.push_back(j);
    const ClassFit own = fit_class(x, rest, n - 1);

    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& [label, f] : full) {
      const double s = log_score(label == labels[i] ? own : f, x.row(i));
      if (s > best_score) {
        best_score = s;
        best = label;
      }
    }
    if (best != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

double torus_replication(const BenchConfig& config, std::size_t rep) {
  const Dataset data = generate_torus_dataset(config.model_id, config.n, config.sigma, config.seed, 2 * rep);
  CounterRng split_rng(config.seed, 2 * rep + 1);
  const std::vector<std::size_t> perm = random_permutation(config.n, split_rng);
  const auto n_train = static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(config.n)));
  if (n_train < 3 || n_train >= config.n) throw DataError("torus_benchmark: split leaves an empty part");
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  MsirConfig fc;
  fc.d = config.d;
  fc.ridge_c = config.ridge_c;
  fc.metric_x = config.metric;
  fc.metric_y = MetricKind::euclidean;
  fc.gamma_x = Bandwidth::auto_median(config.gamma_x_scale);
  fc.gamma_y = Bandwidth::auto_median(config.gamma_y_scale);
  const MsirModel model = fit(subset(data, train), fc);

  const Dataset held_out = subset(data, test);
  const Matrix predictors = transform(model, held_out.x);
  return distance_correlation(Matrix::column(std::get<ScalarResponse>(held_out.y)), predictors);
}

ExperimentReport summarize(std::vector<double> scores, const BenchConfig& config) {
  ExperimentReport r;
  r.config = config;
  const double k = static_cast<double>(scores.size());
  if (!scores.empty()) {
    r.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / k;
    if (scores.size() > 1) {
      double ss = 0.0;
      for (double s : scores) ss += (s - r.mean) * (s - r.mean);
      r.sd = std::sqrt(ss / (k - 1.0));
    }
    // Keep the mean inside [min, max] despite rounding.
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    r.mean = std::clamp(r.mean, *lo, *hi);
  }
  r.per_replication = std::move(scores);
  return r;
}

ExperimentReport torus_benchmark(const BenchConfig& config) {
  torus_anchor(config.model_id);
  if (config.reps < 1) throw DataError("torus_benchmark: reps must be at least 1");
  if (config.n < 25) throw DataError("torus_benchmark: n must be at least 25");
  std::vector<double> scores(config.reps);
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(config.reps)));
  if (jobs == 1) {
    for (std::size_t r = 0; r < config.reps; ++r) scores[r] = torus_replication(config, r);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < config.reps; r += jobs) scores[r] = torus_replication(config, r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return summarize(std::move(scores), config);
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  const BenchConfig& c = report.config;
  const std::string prefix = std::to_string(c.model_id) + "," + std::to_string(c.n) + "," + format_double(c.sigma) +
                             "," + std::string(to_string(c.metric)) + ",";
  out << "model_id,n,sigma,metric,rep,score\n";
  for (std::size_t r = 0; r < report.per_replication.size(); ++r)
    out << prefix << r << ',' << format_double(report.per_replication[r]) << '\n';
  out << prefix << "mean," << format_double(report.mean) << '\n';
  out << prefix << "sd," << format_double(report.sd) << '\n';
}

}  // namespace msir
