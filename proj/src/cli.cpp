#include "msir/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "msir/csv_io.hpp"
#include "msir/datasets.hpp"
#include "msir/errors.hpp"
#include "msir/evaluation.hpp"
#include "msir/model_io.hpp"
#include "msir/msir.hpp"

namespace msir::cli {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptionSpec {
  std::string name;  // flag without dashes
  std::string fallback;
  std::string help;
  bool required = false;
  bool flag_only = true;  // false: settable from --config only
};

const std::map<std::string, std::vector<OptionSpec>>& verb_specs() {
  static const std::map<std::string, std::vector<OptionSpec>> specs{
      {"simulate",
       {{"model", "2", "torus model id (1 or 2)"},
        {"n", "250", "sample size"},
        {"sigma", "0.05", "noise standard deviation"},
        {"seed", "1", "random seed"},
        {"out", "", "output CSV", true}}},
      {"fit",
       {{"in", "", "training CSV", true},
        {"metric", "euclidean", "predictor metric id"},
        {"metric-y", "auto", "response metric id, or categorical (auto: from the file header)"},
        {"dim", "2", "number of sufficient predictors d"},
        {"gamma-x", "auto", "predictor bandwidth gamma, or auto for the median heuristic"},
        {"gamma-y", "auto", "response bandwidth gamma, or auto for the median heuristic"},
        {"ridge-c", "0.2", "ridge constant c in tau = c * phi_1(G)"},
        {"partitions", "1", "number of disjoint subsets for partitioned fitting"},
        {"seed", "1", "seed for the partition shuffle"},
        {"out", "", "output model JSON", true},
        {"gamma-x-scale", "1", "multiplier on the automatic predictor gamma", false, false},
        {"gamma-y-scale", "1", "multiplier on the automatic response gamma", false, false},
        {"eigen-target", "gram_product", "gram_product or coordinate", false, false},
        {"kl-centered", "false", "subtract p/2 from spd_sym_kl", false, false},
        {"jobs", "1", "worker threads", false, false}}},
      {"transform",
       {{"model", "", "model JSON", true}, {"in", "", "input CSV", true}, {"out", "", "output CSV", true}}},
      {"eval",
       {{"model", "", "model JSON", true},
        {"in", "", "input CSV", true},
        {"stat", "dcor", "dcor or qda"},
        {"out", "", "output CSV", true}}},
      {"bench",
       {{"model", "2", "torus model id (1 or 2)"},
        {"n", "250", "sample size per replication"},
        {"sigma", "0.05", "noise standard deviation"},
        {"metric", "torus_geodesic", "predictor metric id"},
        {"reps", "200", "number of replications"},
        {"seed", "1", "base seed"},
        {"dim", "2", "number of sufficient predictors d"},
        {"jobs", "1", "worker threads over replications"},
        {"out", "", "output report CSV", true},
        {"gamma-x-scale", "2", "predictor gamma as a multiple of the median heuristic", false, false},
        {"gamma-y-scale", "1", "response gamma as a multiple of the median heuristic", false, false},
        {"ridge-c", "0.2", "ridge constant c", false, false}}},
  };
  return specs;
}

// Resolved option values for one invocation.
class Settings {
 public:
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const { return values_.at(key); }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
      throw UsageError("--" + key + ": expected a number, got '" + s + "'");
    return v;
  }

  std::uint64_t count(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw UsageError("--" + key + ": expected a nonnegative integer, got '" + s + "'");
    return v;
  }

  bool boolean(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError("--" + key + ": expected true or false, got '" + s + "'");
  }

  MetricKind metric(const std::string& key) const {
    const auto m = parse_metric(str(key));
    if (!m) throw UsageError("--" + key + ": unknown metric '" + str(key) + "'");
    return *m;
  }

  json echo(const std::string& verb) const {
    json j;
    j["verb"] = verb;
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  std::map<std::string, std::string> values_;
};

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  throw UsageError("config: values must be strings, numbers, or booleans");
}

std::string synopsis() {
  return "usage: msir <verb> [flags] [--config file.json]\n"
         "  simulate  --model 1|2 --n N --sigma S --seed K --out data.csv\n"
         "  fit       --in data.csv --metric ID [--metric-y ID|categorical] [--dim d]\n"
         "            [--gamma-x g|auto] [--gamma-y g|auto] [--ridge-c c] [--partitions Q] [--seed K] --out model.json\n"
         "  transform --model model.json --in data.csv --out predictors.csv\n"
         "  eval      --model model.json --in data.csv --stat dcor|qda --out stat.csv\n"
         "  bench     --model 1|2 --n N --sigma S --metric ID --reps R --seed K [--dim d] [--jobs J] --out report.csv\n"
         "metrics: euclidean torus_geodesic arc_length hamming spd_affine spd_log_euclidean\n"
         "         spd_s_divergence spd_sym_kl spd_frobenius spd_pearson\n";
}

Bandwidth bandwidth(const Settings& s, const std::string& key, const std::string& scale_key) {
  if (s.str(key) == "auto") return Bandwidth::auto_median(s.real(scale_key));
  const double g = s.real(key);
  if (!(g > 0.0)) throw UsageError("--" + key + " must be positive");
  return Bandwidth::fixed(g);
}

void open_out(std::ofstream& f, const std::string& path) {
  f.open(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
}

// Response points re-tagged for the response metric.
Dataset retag_response(Dataset d, MetricKind metric_y) {
  if (auto* ys = std::get_if<MetricResponse>(&d.y))
    for (Point& p : *ys)
      if (const auto* v = std::get_if<VectorPoint>(&p)) p = VectorPoint(v->coords(), expected_tag(metric_y));
  return d;
}

Dataset load_for_model(const std::string& path, const MsirModel& model) {
  return load_csv_dataset(path, infer_schema(path, model.kernel_x.metric));
}

int do_simulate(const Settings& s) {
  const auto model_id = static_cast<int>(s.count("model"));
  const Dataset d = generate_torus_dataset(model_id, s.count("n"), s.real("sigma"), s.count("seed"));
  write_dataset_csv(s.str("out"), d);
  return ok;
}

int do_fit(const Settings& s) {
  MsirConfig c;
  c.metric_x = s.metric("metric");
  c.d = s.count("dim");
  c.ridge_c = s.real("ridge-c");
  c.partitions = s.count("partitions");
  c.gamma_x = bandwidth(s, "gamma-x", "gamma-x-scale");
  c.gamma_y = bandwidth(s, "gamma-y", "gamma-y-scale");
  c.options.kl_centered = s.boolean("kl-centered");
  c.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, s.count("jobs")));
  const std::string& target = s.str("eigen-target");
  if (target == "coordinate")
    c.eigen_target = EigenTarget::coordinate;
  else if (target != "gram_product")
    throw UsageError("eigen-target must be gram_product or coordinate");

  const std::string& path = s.str("in");
  const CsvSchema schema = infer_schema(path, c.metric_x);
  const std::string& my = s.str("metric-y");
  if (schema.response == ResponseFormat::label) {
    if (my != "auto" && my != "categorical")
      throw DataError("label responses require --metric-y categorical");
  } else {
    if (my == "categorical") throw DataError("--metric-y categorical needs a label column");
    c.metric_y = my == "auto" ? MetricKind::euclidean : s.metric("metric-y");
  }
  const Dataset d = retag_response(load_csv_dataset(path, schema), c.metric_y);

  std::vector<MsirModel> models;
  if (c.partitions > 1)
    models = fit_partitioned(d, c, s.count("seed")).models;
  else
    models.push_back(fit(d, c));
  save_models(s.str("out"), models);
  return ok;
}

std::vector<std::string> predictor_header(std::size_t d) {
  std::vector<std::string> h;
  for (std::size_t j = 0; j < d; ++j) h.push_back("p" + std::to_string(j + 1));
  return h;
}

int do_transform(const Settings& s) {
  const auto models = load_models(s.str("model"));
  const Dataset d = load_for_model(s.str("in"), models.front());
  const Matrix p = ensemble_transform(models, d.x);
  std::ofstream out;
  open_out(out, s.str("out"));
  write_matrix_csv(out, p, predictor_header(p.cols()));
  return ok;
}

int do_eval(const Settings& s) {
  const std::string& stat = s.str("stat");
  if (stat != "dcor" && stat != "qda") throw UsageError("--stat must be dcor or qda");
  const auto models = load_models(s.str("model"));
  const Dataset d = load_for_model(s.str("in"), models.front());
  const Matrix p = ensemble_transform(models, d.x);
  double value = 0.0;
  if (stat == "qda") {
    const auto* labels = std::get_if<LabelResponse>(&d.y);
    if (!labels) throw DataError("--stat qda needs a label column");
    value = qda_loocv_error(p, *labels);
  } else if (const auto* y = std::get_if<ScalarResponse>(&d.y)) {
    value = distance_correlation(Matrix::column(*y), p);
  } else if (const auto* yv = std::get_if<MetricResponse>(&d.y)) {
    const std::size_t q = std::get<VectorPoint>(yv->front()).size();
    Matrix ym(yv->size(), q);
    for (std::size_t i = 0; i < yv->size(); ++i) {
      const auto& c = std::get<VectorPoint>((*yv)[i]).coords();
      std::copy(c.begin(), c.end(), ym.row(i).begin());
    }
    value = distance_correlation(ym, p);
  } else {
    const auto& labels = std::get<LabelResponse>(d.y);
    std::vector<double> as_real(labels.begin(), labels.end());
    value = distance_correlation(Matrix::column(as_real), p);
  }
  std::ofstream out;
  open_out(out, s.str("out"));
  out << "stat,value\n" << stat << ',' << format_double(value) << '\n';
  return ok;
}

int do_bench(const Settings& s) {
  BenchConfig c;
  c.model_id = static_cast<int>(s.count("model"));
  c.n = s.count("n");
  c.sigma = s.real("sigma");
  c.metric = s.metric("metric");
  c.reps = s.count("reps");
  c.seed = s.count("seed");
  c.d = s.count("dim");
  c.jobs = static_cast<unsigned>(std::max<std::uint64_t>(1, s.count("jobs")));
  c.gamma_x_scale = s.real("gamma-x-scale");
  c.gamma_y_scale = s.real("gamma-y-scale");
  c.ridge_c = s.real("ridge-c");
  if (is_spd_metric(c.metric) || (c.metric != MetricKind::euclidean && c.metric != MetricKind::torus_geodesic))
    throw UsageError("bench supports the euclidean and torus_geodesic metrics");
  const ExperimentReport r = torus_benchmark(c);
  std::ofstream out;
  open_out(out, s.str("out"));
  write_report_csv(out, r);
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metric sliced inverse regression", "msir"};
  app.require_subcommand(1, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default flag values")->check(CLI::ExistingFile);
  app.fallthrough();

  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> handles;
  for (const auto& [verb, specs] : verb_specs()) {
    CLI::App* sub = app.add_subcommand(verb);
    for (const auto& spec : specs) {
      if (!spec.flag_only) continue;
      handles[verb][spec.name] = sub->add_option("--" + spec.name, raw[verb][spec.name], spec.help);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << synopsis();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "msir: " << e.what() << '\n' << synopsis();
    return usage;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    json config = json::object();
    if (!config_path.empty()) {
      std::ifstream cf(config_path);
      try {
        config = json::parse(cf);
      } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
      }
      if (!config.is_object()) throw UsageError("config: top level must be an object");
    }
    const auto& specs = verb_specs().at(verb);
    std::set<std::string> known;
    for (const auto& spec : specs) known.insert(spec.name);
    for (const auto& [key, value] : config.items()) {
      std::string k = key;
      std::replace(k.begin(), k.end(), '_', '-');
      if (!known.count(k)) throw UsageError("config: unknown key '" + key + "' for " + verb);
    }

    std::map<std::string, std::string> values;
    for (const auto& spec : specs) {
      std::optional<std::string> v;
      if (spec.flag_only && handles[verb][spec.name]->count() > 0) v = raw[verb][spec.name];
      if (!v) {
        std::string underscored = spec.name;
        std::replace(underscored.begin(), underscored.end(), '-', '_');
        if (config.contains(spec.name))
          v = config_value(config.at(spec.name));
        else if (config.contains(underscored))
          v = config_value(config.at(underscored));
      }
      if (!v) {
        if (spec.required) throw UsageError("--" + spec.name + " is required");
        v = spec.fallback;
      }
      values[spec.name] = *v;
    }
    const Settings settings(std::move(values));
    err << settings.echo(verb).dump() << '\n';

    if (verb == "simulate") return do_simulate(settings);
    if (verb == "fit") return do_fit(settings);
    if (verb == "transform") return do_transform(settings);
    if (verb == "eval") return do_eval(settings);
    return do_bench(settings);
  } catch (const UsageError& e) {
    err << "msir " << verb << ": " << e.what() << '\n' << synopsis();
    return usage;
  } catch (const std::exception& e) {
    err << "msir " << verb << ": " << e.what() << '\n';
    return data;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace msir::cli
