#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "msir/msir.hpp"

namespace msir {

// Model files are JSON. A single fit is an object with "format": "msir-model";
// a partitioned fit is {"format": "msir-ensemble", "members": [model, ...]}.
// Every real number is written with 17 significant digits.
void write_model(std::ostream& out, const MsirModel& model);
void write_models(std::ostream& out, std::span<const MsirModel> models);
void save_models(const std::string& path, std::span<const MsirModel> models);

// Accepts both layouts; a single model comes back as a one-element list.
std::vector<MsirModel> read_models(std::istream& in);
std::vector<MsirModel> load_models(const std::string& path);

}  // namespace msir
