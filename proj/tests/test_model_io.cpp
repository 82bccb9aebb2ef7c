#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "msir/csv_io.hpp"
#include "msir/datasets.hpp"
#include "msir/errors.hpp"
#include "msir/model_io.hpp"
#include "test_support.hpp"

using namespace msir;
namespace mt = msir::testing;

namespace {

MsirModel round_trip(const MsirModel& m) {
  std::ostringstream os;
  write_model(os, m);
  std::istringstream is(os.str());
  auto models = read_models(is);
  EXPECT_EQ(models.size(), 1u);
  return models.front();
}

void expect_same(const MsirModel& a, const MsirModel& b) {
  EXPECT_EQ(a.training_x, b.training_x);
  EXPECT_EQ(a.kernel_x.gamma, b.kernel_x.gamma);
  EXPECT_EQ(a.kernel_x.metric, b.kernel_x.metric);
  EXPECT_EQ(a.kernel_x.options.kl_centered, b.kernel_x.options.kl_centered);
  EXPECT_EQ(a.tau1, b.tau1);
  EXPECT_EQ(a.tau2, b.tau2);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
  EXPECT_EQ(a.response_mode, b.response_mode);
  EXPECT_EQ(a.eigen_target, b.eigen_target);
}

}  // namespace

TEST(ModelIo, TorusModelRoundTripsBitExactly) {
  Dataset d = generate_torus_dataset(2, 40, 0.05, 3);
  MsirConfig c;
  c.metric_x = MetricKind::torus_geodesic;
  MsirModel m = fit(d, c);
  MsirModel back = round_trip(m);
  expect_same(m, back);
  Dataset probe = generate_torus_dataset(2, 10, 0.0, 99);
  EXPECT_EQ(transform(m, probe.x), transform(back, probe.x));
}

TEST(ModelIo, SpdCategoricalModelRoundTrips) {
  Dataset d = generate_spd_dataset(24, 3, 2, 0.4, 5);
  MsirConfig c;
  c.metric_x = MetricKind::spd_sym_kl;
  c.options.kl_centered = true;
  c.eigen_target = EigenTarget::coordinate;
  c.d = 1;
  MsirModel m = fit(d, c);
  MsirModel back = round_trip(m);
  expect_same(m, back);
  EXPECT_EQ(back.response_mode, ResponseMode::categorical);
  EXPECT_EQ(transform(m, d.x), transform(back, d.x));
}

TEST(ModelIo, FileFieldsAndEnsemble) {
  Dataset d = generate_torus_dataset(1, 30, 0.05, 3);
  MsirConfig c;
  c.partitions = 3;
  PartitionedFit p = fit_partitioned(d, c, 4);
  std::ostringstream os;
  write_models(os, p.models);
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["format"], "msir-ensemble");
  ASSERT_EQ(j["members"].size(), 3u);
  const auto& first = j["members"][0];
  for (const char* key : {"metric", "gamma", "tau1", "tau2", "d", "eigenvalues", "eigenvectors", "points"})
    EXPECT_TRUE(first.contains(key)) << key;
  EXPECT_EQ(first["metric"], "euclidean");
  EXPECT_EQ(first["eigenvectors"].size(), 10u * 2u);

  std::istringstream is(os.str());
  auto back = read_models(is);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(ensemble_transform(back, d.x), ensemble_transform(p.models, d.x));

  std::ostringstream one;
  write_models(one, std::span<const MsirModel>(p.models.data(), 1));
  EXPECT_EQ(nlohmann::json::parse(one.str())["format"], "msir-model");
}

TEST(ModelIo, SeventeenDigitNumbers) {
  Dataset d = generate_torus_dataset(2, 20, 0.05, 3);
  MsirModel m = fit(d, MsirConfig{});
  std::ostringstream os;
  write_model(os, m);
  EXPECT_NE(os.str().find(format_double17(m.tau1)), std::string::npos);
}

TEST(ModelIo, RejectsMalformedFiles) {
  auto fails = [](const std::string& text) {
    std::istringstream is(text);
    EXPECT_THROW(read_models(is), DataError) << text;
  };
  fails("not json");
  fails("{}");
  fails(R"({"format":"something-else"})");
  fails(R"({"format":"msir-model","version":1,"metric":"nope"})");
  fails(R"({"format":"msir-ensemble","members":[]})");

  Dataset d = generate_torus_dataset(2, 10, 0.05, 3);
  MsirModel m = fit(d, MsirConfig{});
  std::ostringstream os;
  write_model(os, m);
  auto j = nlohmann::json::parse(os.str());
  j["eigenvectors"].erase(0);
  fails(j.dump());
  EXPECT_THROW(load_models("/nonexistent/model.json"), DataError);
}
