#include "msir/model_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "msir/csv_io.hpp"
#include "msir/errors.hpp"

namespace msir {
namespace {

using nlohmann::json;

void write_array(std::ostream& out, std::span<const double> values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_double17(values[i]);
  out << ']';
}

void write_model_body(std::ostream& out, const MsirModel& m, const std::string& indent) {
  const bool spd = !m.training_x.empty() && std::holds_alternative<SpdPoint>(m.training_x.front());
  out << "{\n";
  out << indent << "  \"format\": \"msir-model\",\n";
  out << indent << "  \"version\": 1,\n";
  out << indent << "  \"metric\": \"" << to_string(m.kernel_x.metric) << "\",\n";
  out << indent << "  \"kl_centered\": " << (m.kernel_x.options.kl_centered ? "true" : "false") << ",\n";
  out << indent << "  \"gamma\": " << format_double17(m.kernel_x.gamma) << ",\n";
  out << indent << "  \"tau1\": " << format_double17(m.tau1) << ",\n";
  out << indent << "  \"tau2\": " << format_double17(m.tau2) << ",\n";
  out << indent << "  \"d\": " << m.d() << ",\n";
  out << indent << "  \"n\": " << m.n() << ",\n";
  out << indent << "  \"response_mode\": \""
      << (m.response_mode == ResponseMode::categorical ? "categorical" : "metric") << "\",\n";
  out << indent << "  \"eigen_target\": \""
      << (m.eigen_target == EigenTarget::coordinate ? "coordinate" : "gram_product") << "\",\n";
  out << indent << "  \"eigenvalues\": ";
  write_array(out, m.eigenvalues);
  out << ",\n" << indent << "  \"eigenvectors\": ";
  write_array(out, m.eigenvectors.values());
  out << ",\n" << indent << "  \"point_type\": \"" << (spd ? "spd" : "vector") << "\",\n";
  if (!spd && !m.training_x.empty())
    out << indent << "  \"space_tag\": \"" << to_string(std::get<VectorPoint>(m.training_x.front()).tag())
        << "\",\n";
  out << indent << "  \"points\": [";
  for (std::size_t i = 0; i < m.training_x.size(); ++i) {
    out << (i ? ",\n" : "\n") << indent << "    ";
    if (spd)
      write_array(out, std::get<SpdPoint>(m.training_x[i]).matrix().values());
    else
      write_array(out, std::get<VectorPoint>(m.training_x[i]).coords());
  }
  out << "\n" << indent << "  ]\n" << indent << "}";
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw DataError(std::string("model file: missing array '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

MsirModel model_from_json(const json& j) {
  if (j.value("format", "") != "msir-model") throw DataError("model file: not an msir-model object");
  MsirModel m;
  const auto metric = parse_metric(j.at("metric").get<std::string>());
  if (!metric) throw DataError("model file: unknown metric '" + j.at("metric").get<std::string>() + "'");
  m.kernel_x.metric = *metric;
  m.kernel_x.options.kl_centered = j.value("kl_centered", false);
  m.kernel_x.gamma = j.at("gamma").get<double>();
  m.tau1 = j.at("tau1").get<double>();
  m.tau2 = j.at("tau2").get<double>();
  const auto d = j.at("d").get<std::size_t>();
  const auto n = j.at("n").get<std::size_t>();
  m.response_mode = j.value("response_mode", "metric") == "categorical" ? ResponseMode::categorical
                                                                          : ResponseMode::metric;
  m.eigen_target = j.value("eigen_target", "gram_product") == "coordinate" ? EigenTarget::coordinate
                                                                            : EigenTarget::gram_product;
  m.eigenvalues = numbers(j, "eigenvalues");
  const auto vecs = numbers(j, "eigenvectors");
  if (m.eigenvalues.size() != d || vecs.size() != n * d) throw DataError("model file: eigenpair sizes disagree with n, d");
  m.eigenvectors = Matrix(n, d);
  std::copy(vecs.begin(), vecs.end(), m.eigenvectors.data());

  const std::string type = j.at("point_type").get<std::string>();
  const auto& pts = j.at("points");
  if (pts.size() != n) throw DataError("model file: point count disagrees with n");
  if (type == "spd") {
    for (const auto& p : pts) {
      const auto v = p.get<std::vector<double>>();
      std::size_t dim = 0;
      while (dim * dim < v.size()) ++dim;
      if (dim * dim != v.size()) throw DataError("model file: SPD point is not a square matrix");
      Matrix mat(dim, dim);
      std::copy(v.begin(), v.end(), mat.data());
      m.training_x.emplace_back(SpdPoint(std::move(mat)));
    }
  } else if (type == "vector") {
    const auto tag = parse_space_tag(j.value("space_tag", "euclidean"));
    if (!tag) throw DataError("model file: unknown space tag");
    for (const auto& p : pts) m.training_x.emplace_back(VectorPoint(p.get<std::vector<double>>(), *tag));
  } else {
    throw DataError("model file: unknown point_type '" + type + "'");
  }
  return m;
}

}  // namespace

void write_model(std::ostream& out, const MsirModel& model) {
  write_model_body(out, model, "");
  out << '\n';
}

void write_models(std::ostream& out, std::span<const MsirModel> models) {
  if (models.empty()) throw DataError("write_models: nothing to write");
  if (models.size() == 1) {
    write_model(out, models.front());
    return;
  }
  out << "{\n  \"format\": \"msir-ensemble\",\n  \"version\": 1,\n  \"members\": [\n    ";
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (i) out << ",\n    ";
    write_model_body(out, models[i], "    ");
  }
  out << "\n  ]\n}\n";
}

void save_models(const std::string& path, std::span<const MsirModel> models) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_models(out, models);
}

std::vector<MsirModel> read_models(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  try {
    std::vector<MsirModel> out;
    const std::string format = j.value("format", "");
    if (format == "msir-ensemble") {
      for (const auto& member : j.at("members")) out.push_back(model_from_json(member));
      if (out.empty()) throw DataError("model file: ensemble has no members");
    } else {
      out.push_back(model_from_json(j));
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

std::vector<MsirModel> load_models(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_models(in);
}

}  // namespace msir
