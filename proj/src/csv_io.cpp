#include "msir/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "msir/datasets.hpp"
#include "msir/errors.hpp"

namespace msir {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
  return v;
}

int parse_label(const std::string& s, std::size_t line) {
  const double v = parse_number(s, line);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw DataError("line " + std::to_string(line) + ": label '" + s + "' is not an integer");
  return static_cast<int>(v);
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

std::size_t count_prefixed(const std::vector<std::string>& header, const char* prefix) {
  std::size_t k = 0;
  for (const auto& h : header)
    if (starts_with(h, prefix)) ++k;
  return k;
}

}  // namespace

Dataset parse_csv_dataset(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw DataError("no data rows");

  std::size_t response_cols = 1;
  if (schema.response == ResponseFormat::vector) {
    response_cols = 0;
    while (response_cols < header.size() && starts_with(header[response_cols], "y")) ++response_cols;
    if (response_cols == 0) throw DataError("line " + std::to_string(line_no) + ": no y1..yq response columns");
  } else {
    const char* expected = schema.response == ResponseFormat::scalar ? "y" : "label";
    if (header[0] != expected)
      throw DataError("line " + std::to_string(line_no) + ": first column must be '" + expected + "'");
  }

  Dataset d;
  ScalarResponse scalars;
  LabelResponse labels;
  MetricResponse vectors;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(cells.size()));
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = response_cols; c < cells.size(); ++c) values.push_back(parse_number(cells[c], line_no));

    try {
      switch (schema.response) {
        case ResponseFormat::scalar:
          scalars.push_back(parse_number(cells[0], line_no));
          break;
        case ResponseFormat::label:
          labels.push_back(parse_label(cells[0], line_no));
          break;
        case ResponseFormat::vector: {
          std::vector<double> yv;
          for (std::size_t c = 0; c < response_cols; ++c) yv.push_back(parse_number(cells[c], line_no));
          vectors.emplace_back(VectorPoint(std::move(yv)));
          break;
        }
      }

      switch (schema.predictors) {
        case PredictorFormat::vector:
          d.x.emplace_back(VectorPoint(std::move(values), schema.tag));
          break;
        case PredictorFormat::spd: {
          if (values.empty()) throw DataError("missing matrix size");
          const double pv = values[0];
          if (pv < 1 || pv != std::floor(pv)) throw DataError("matrix size p must be a positive integer");
          const auto p = static_cast<std::size_t>(pv);
          if (values.size() != 1 + p * p)
            throw DataError("expected " + std::to_string(p * p) + " matrix entries for p = " + std::to_string(p));
          Matrix m(p, p);
          for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) m(i, j) = values[1 + i * p + j];
          for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j)
              if (std::abs(m(i, j) - m(j, i)) > 1e-8) throw DataError("matrix is not symmetric");
          d.x.emplace_back(SpdPoint(symmetrized(m)));
          break;
        }
        case PredictorFormat::composition: {
          double sum = 0.0;
          for (double v : values) {
            if (v < 0.0) throw DataError("composition has a negative entry");
            sum += v;
          }
          if (std::abs(sum - 1.0) > 1e-6) throw DataError("composition does not sum to 1");
          for (double& v : values) v /= sum;
          switch (schema.composition_map) {
            case CompositionMap::none:
              d.x.emplace_back(VectorPoint(std::move(values)));
              break;
            case CompositionMap::sqrt_sphere:
              d.x.emplace_back(sqrt_compositional_map(values));
              break;
            case CompositionMap::dichotomize:
              d.x.emplace_back(dichotomize(values, schema.dichotomize_threshold));
              break;
          }
          break;
        }
      }
    } catch (const DataError& e) {
      const std::string msg = e.what();
      if (starts_with(msg, "line ")) throw;
      throw DataError("row " + std::to_string(row + 1) + " (line " + std::to_string(line_no) + "): " + msg);
    }
    ++row;
  }
  if (row == 0) throw DataError("no data rows");

  switch (schema.response) {
    case ResponseFormat::scalar:
      d.y = std::move(scalars);
      break;
    case ResponseFormat::label:
      d.y = std::move(labels);
      break;
    case ResponseFormat::vector:
      d.y = std::move(vectors);
      break;
  }
  validate(d);
  return d;
}

Dataset load_csv_dataset(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv_dataset(in, schema);
}

CsvSchema infer_schema(const std::string& path, MetricKind metric) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  const auto header = split(line);
  if (header.empty()) throw DataError("no data rows");

  CsvSchema s;
  if (header[0] == "label") {
    s.response = ResponseFormat::label;
  } else if (header[0] == "y") {
    s.response = ResponseFormat::scalar;
  } else if (starts_with(header[0], "y")) {
    s.response = ResponseFormat::vector;
  } else {
    throw DataError("line 1: first column must be y, label, or y1");
  }
  if (header.size() > 1 && header[1] == "p") {
    s.predictors = PredictorFormat::spd;
  } else if (metric == MetricKind::arc_length || metric == MetricKind::hamming) {
    s.predictors = PredictorFormat::composition;
    s.composition_map = metric == MetricKind::arc_length ? CompositionMap::sqrt_sphere : CompositionMap::dichotomize;
  } else {
    s.predictors = PredictorFormat::vector;
    s.tag = expected_tag(metric);
  }
  if (count_prefixed(header, "x") == 0 && s.predictors != PredictorFormat::spd)
    throw DataError("line 1: no x1..xp predictor columns");
  return s;
}

std::string format_double(double v) {
  char buf[40];
  for (int digits = 15; digits < 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
  validate(d);
  const bool labels = std::holds_alternative<LabelResponse>(d.y);
  if (std::holds_alternative<MetricResponse>(d.y)) throw DataError("write_dataset_csv: metric responses unsupported");
  const auto* first_vec = std::get_if<VectorPoint>(&d.x.front());
  if (first_vec) {
    out << (labels ? "label" : "y");
    for (std::size_t j = 0; j < first_vec->size(); ++j) out << ",x" << j + 1;
  } else {
    const std::size_t p = std::get<SpdPoint>(d.x.front()).dim();
    out << (labels ? "label" : "y") << ",p";
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) out << ",m" << i + 1 << j + 1;
  }
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (labels)
      out << std::get<LabelResponse>(d.y)[i];
    else
      out << format_double(std::get<ScalarResponse>(d.y)[i]);
    if (const auto* v = std::get_if<VectorPoint>(&d.x[i])) {
      for (double c : v->coords()) out << ',' << format_double(c);
    } else {
      const Matrix& m = std::get<SpdPoint>(d.x[i]).matrix();
      out << ',' << m.rows();
      for (double c : m.values()) out << ',' << format_double(c);
    }
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_dataset_csv(out, d);
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace msir
