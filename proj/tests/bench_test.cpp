#include "smrnn/bench.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smrnn/data.hpp"
#include "smrnn/rng.hpp"

using namespace smrnn;
namespace fs = std::filesystem;

namespace {

fs::path test_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("smrnn_bench_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST(ReportParams, TotalsAgreeWithInstantiatedModels) {
  const std::vector<std::pair<ModelKind, DatasetKind>> pairings = {
      {ModelKind::sm_rnn, DatasetKind::spatial}, {ModelKind::sm_rnn, DatasetKind::temporal},
      {ModelKind::ff_nn, DatasetKind::spatial},  {ModelKind::rnn, DatasetKind::spatial},
      {ModelKind::rnn, DatasetKind::temporal},   {ModelKind::lstm, DatasetKind::spatial},
      {ModelKind::lstm, DatasetKind::temporal}};
  for (const auto& [model, dataset] : pairings) {
    Rng rng(1);
    EXPECT_EQ(report_params(model, dataset).total(), make_model(model, dataset, rng)->param_count())
        << to_string(model) << "/" << to_string(dataset);
  }
  Rng rng(2);
  EXPECT_THROW(make_model(ModelKind::ff_nn, DatasetKind::temporal, rng), std::invalid_argument);
  EXPECT_THROW(report_params(ModelKind::ff_nn, DatasetKind::temporal), std::invalid_argument);
}

TEST(ReportParams, SmRnnComponentTerms) {
  ParamReport spatial = report_params(ModelKind::sm_rnn, DatasetKind::spatial);
  ASSERT_EQ(spatial.groups.size(), 3u);
  EXPECT_EQ(spatial.groups[0].terms, (std::vector<std::size_t>{240}));
  EXPECT_EQ(spatial.groups[0].multiplier, 2u);
  EXPECT_EQ(spatial.groups[1].terms, (std::vector<std::size_t>{880, 20, 315}));
  EXPECT_EQ(spatial.groups[1].multiplier, 2u);
  EXPECT_EQ(spatial.groups[2].terms, (std::vector<std::size_t>{160, 10, 110, 10}));
  EXPECT_EQ(spatial.total(), 3200u);
  EXPECT_NEAR(static_cast<double>(spatial.total()), 3190.0, 10.0);

  ParamReport temporal = report_params(ModelKind::sm_rnn, DatasetKind::temporal);
  EXPECT_EQ(temporal.groups[0].terms, (std::vector<std::size_t>{930}));
  EXPECT_EQ(temporal.groups[1].terms, (std::vector<std::size_t>{700, 20, 630}));
  EXPECT_EQ(temporal.groups[2].terms, (std::vector<std::size_t>{620, 20, 210, 10}));
  EXPECT_EQ(temporal.total(), 5420u);
  EXPECT_EQ(temporal.arithmetic(),
            "930 * 2 + (700 + 20 + 630) * 2 + (620 + 20 + 210 + 10) = 5420");
}

TEST(ReportParams, BaselineComponentTerms) {
  ParamReport rnn = report_params(ModelKind::rnn, DatasetKind::temporal);
  ASSERT_EQ(rnn.groups.size(), 2u);
  EXPECT_EQ(rnn.groups[0].terms, (std::vector<std::size_t>{1750, 50, 1530, 30}));
  EXPECT_EQ(rnn.groups[0].subtotal(), 3360u);
  EXPECT_EQ(rnn.groups[1].terms, (std::vector<std::size_t>{1550, 50, 510, 10}));
  EXPECT_EQ(rnn.groups[1].subtotal(), 2120u);
  EXPECT_EQ(rnn.total(), 5480u);

  ParamReport lstm = report_params(ModelKind::lstm, DatasetKind::temporal);
  ASSERT_EQ(lstm.groups.size(), 3u);
  EXPECT_EQ(lstm.groups[0].subtotal(), 2000u);
  EXPECT_EQ(lstm.groups[1].subtotal(), 3280u);
  EXPECT_EQ(lstm.groups[2].subtotal(), 210u);
  EXPECT_EQ(lstm.total(), 5490u);
}

TEST(Gradcheck, DefaultProbesPassForVanillaRnn) {
  // The 2-step rnn probes are fast and exercise the probe plumbing end to
  // end; the heavier sm-rnn/lstm probes run in the acceptance suite.
  for (DatasetKind d : {DatasetKind::spatial, DatasetKind::temporal}) {
    GradcheckProbe probe = default_probe(ModelKind::rnn, d);
    EXPECT_LE(gradcheck_model(ModelKind::rnn, d, probe), 1e-4) << to_string(d);
  }
  EXPECT_THROW(default_probe(ModelKind::ff_nn, DatasetKind::temporal), std::invalid_argument);
  GradcheckProbe bad = default_probe(ModelKind::ff_nn, DatasetKind::spatial);
  bad.steps = 27;  // does not divide 784
  EXPECT_THROW(gradcheck_model(ModelKind::ff_nn, DatasetKind::spatial, bad),
               std::invalid_argument);
}

TEST(ConfidenceInterval, AnalyticCases) {
  EXPECT_DOUBLE_EQ(confidence_interval({0.8, 0.8, 0.8}).half_width, 0.0);

  Interval iv = confidence_interval({0.9, 0.95});
  EXPECT_DOUBLE_EQ(iv.mean, 0.925);
  EXPECT_NEAR(iv.half_width, 1.5914, 1e-3);  // t(1, .995) = 63.657 times sd/sqrt(2)

  Interval shifted = confidence_interval({0.8, 0.85});
  EXPECT_NEAR(shifted.half_width, iv.half_width, 1e-12);
  EXPECT_NEAR(shifted.mean, iv.mean - 0.1, 1e-12);

  Interval z = confidence_interval({0.9, 0.95}, 0.99, true);
  EXPECT_NEAR(z.half_width, 2.57583 * 0.025, 1e-4);

  EXPECT_THROW(confidence_interval({0.5}), std::invalid_argument);
}

TEST(Curves, RoundTripAndHeaderOnly) {
  fs::path dir = test_dir("curves");
  const std::string path = (dir / "c.csv").string();
  std::vector<CurvePoint> curve = {{1, 2.3025850929940457, 0.1},
                                   {50, 1.0 / 3.0, 0.66666666666666663},
                                   {100, 0.05, 0.9375}};
  emit_curves(curve, path);
  EXPECT_EQ(parse_curves(path), curve);

  emit_curves({}, path);
  EXPECT_EQ(slurp(path), "iteration,loss,train_accuracy\n");
  EXPECT_TRUE(parse_curves(path).empty());
}

TEST(CurvePaths, DeriveFromReportPath) {
  EXPECT_EQ(curve_path_for_run("report.json", 0), "report_curves_run0.csv");
  EXPECT_EQ(curve_path_for_run("out/rep.json", 2), "out/rep_curves_run2.csv");
  EXPECT_EQ(curve_path_for_run("plain", 1), "plain_curves_run1.csv");
}

TEST(Experiment, DeskScaleSmokeRun) {
  fs::path dir = test_dir("smoke");
  Corpus corpus = synthetic_spatial_corpus(160, 5);
  ExperimentConfig cfg;
  cfg.model = ModelKind::rnn;
  cfg.dataset = DatasetKind::spatial;
  cfg.runs = 3;
  cfg.train.epochs = 1;
  cfg.train.batch_size = 32;
  cfg.train.seed = 7;
  cfg.train_size = 100;
  cfg.test_size = 40;
  cfg.out_path = (dir / "report.json").string();

  RunReport report = run_experiment(cfg, corpus);
  ASSERT_EQ(report.runs.size(), 3u);
  EXPECT_EQ(report.successful, 3u);
  for (const auto& r : report.runs) {
    EXPECT_FALSE(r.failed);
    EXPECT_GE(r.test_rate, 0.0);
    EXPECT_LE(r.test_rate, 1.0);
    EXPECT_FALSE(r.curve.empty());
    EXPECT_TRUE(fs::exists(curve_path_for_run(cfg.out_path, r.run_index)));
  }
  EXPECT_GE(report.rate_interval.half_width, 0.0);

  nlohmann::json j = nlohmann::json::parse(slurp(cfg.out_path));
  EXPECT_EQ(j.at("config").at("model"), "rnn");
  EXPECT_EQ(j.at("params").at("total"), 3470);
  EXPECT_EQ(j.at("aggregate").at("successful"), 3);
  ASSERT_EQ(j.at("literature").size(), 5u);
  for (const auto& row : j.at("literature")) EXPECT_EQ(row.at("source"), "paper");
}

TEST(Experiment, UntrainedModelScoresNearChance) {
  Corpus corpus = synthetic_spatial_corpus(300, 6);
  ExperimentConfig cfg;
  cfg.model = ModelKind::rnn;
  cfg.runs = 1;
  cfg.train.epochs = 0;
  cfg.train_size = 100;
  cfg.test_size = 200;
  RunReport report = run_experiment(cfg, corpus);
  ASSERT_EQ(report.successful, 1u);
  EXPECT_LE(report.runs[0].test_rate, 0.35);  // balanced 10-class data, untrained
  EXPECT_TRUE(report.runs[0].curve.empty());
}

TEST(Experiment, DivergentRunsAreFlaggedNotRetried) {
  Corpus corpus = synthetic_spatial_corpus(160, 8);
  ExperimentConfig cfg;
  cfg.model = ModelKind::rnn;
  cfg.runs = 2;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 32;
  cfg.train_size = 100;
  cfg.test_size = 40;
  cfg.adam.lr = 1e308;  // first update catapults the weights out of range
  RunReport report = run_experiment(cfg, corpus);
  EXPECT_EQ(report.successful, 0u);
  for (const auto& r : report.runs) {
    EXPECT_TRUE(r.failed);
    EXPECT_FALSE(r.error.empty());
  }
  nlohmann::json j = report_to_json(report);
  EXPECT_FALSE(j.at("aggregate").contains("mean"));
  EXPECT_TRUE(j.at("runs").at(0).contains("error"));
}

TEST(Experiment, ByteStableAcrossInvocations) {
  fs::path dir = test_dir("det");
  Corpus corpus = synthetic_spatial_corpus(140, 9);
  ExperimentConfig cfg;
  cfg.model = ModelKind::rnn;
  cfg.runs = 2;
  cfg.train.epochs = 1;
  cfg.train.batch_size = 32;
  cfg.train.seed = 3;
  cfg.train_size = 90;
  cfg.test_size = 40;

  cfg.out_path = (dir / "a.json").string();
  run_experiment(cfg, corpus);
  cfg.out_path = (dir / "b.json").string();
  run_experiment(cfg, corpus);

  nlohmann::json a = nlohmann::json::parse(slurp(dir / "a.json"));
  nlohmann::json b = nlohmann::json::parse(slurp(dir / "b.json"));
  a.erase("wall_seconds");
  b.erase("wall_seconds");
  EXPECT_EQ(a.dump(), b.dump());
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(slurp(curve_path_for_run((dir / "a.json").string(), r)),
              slurp(curve_path_for_run((dir / "b.json").string(), r)));
  }
}
