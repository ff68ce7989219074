// Command-line front end: train experiments, print parameter reports, run
// gradient checks, and generate synthetic datasets for the loaders.
#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "smrnn/bench.hpp"
#include "smrnn/data.hpp"

namespace {

using namespace smrnn;

struct DataFlags {
  std::vector<std::string> images;
  std::vector<std::string> labels;
  std::vector<std::string> strokes_dirs;
  std::vector<std::string> stroke_labels;
  std::size_t synthetic = 0;
  std::uint64_t synth_seed = 12345;
};

void add_data_flags(CLI::App& cmd, DataFlags& flags) {
  cmd.add_option("--images", flags.images,
                 "IDX image file (spatial dataset; repeat to concatenate corpora)");
  cmd.add_option("--labels", flags.labels, "IDX label file, one per --images");
  cmd.add_option("--strokes-dir", flags.strokes_dirs,
                 "directory of stroke sample files (temporal dataset; repeatable)");
  cmd.add_option("--stroke-labels", flags.stroke_labels,
                 "stroke labels file, one per --strokes-dir (default <dir>/labels.txt)");
  cmd.add_option("--synthetic", flags.synthetic,
                 "generate N synthetic samples instead of loading files");
  cmd.add_option("--synthetic-seed", flags.synth_seed, "seed for the synthetic generator");
}

Corpus load_corpus(DatasetKind dataset, const DataFlags& flags) {
  const bool spatial = dataset == DatasetKind::spatial;
  if (flags.synthetic > 0) {
    return spatial ? synthetic_spatial_corpus(flags.synthetic, flags.synth_seed)
                   : synthetic_stroke_corpus(flags.synthetic, flags.synth_seed);
  }
  Corpus corpus;
  auto append = [&corpus](Corpus part) {
    corpus.insert(corpus.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  };
  if (spatial) {
    if (flags.images.empty() || flags.images.size() != flags.labels.size()) {
      throw CLI::ValidationError(
          "spatial dataset needs matching --images/--labels pairs (or --synthetic N)");
    }
    for (std::size_t i = 0; i < flags.images.size(); ++i) {
      append(make_spatial_corpus(load_idx_images(flags.images[i]),
                                 load_idx_labels(flags.labels[i])));
    }
    return corpus;
  }
  if (flags.strokes_dirs.empty()) {
    throw CLI::ValidationError("temporal dataset needs --strokes-dir (or --synthetic N)");
  }
  if (!flags.stroke_labels.empty() && flags.stroke_labels.size() != flags.strokes_dirs.size()) {
    throw CLI::ValidationError("--stroke-labels count must match --strokes-dir count");
  }
  for (std::size_t i = 0; i < flags.strokes_dirs.size(); ++i) {
    std::string labels = i < flags.stroke_labels.size() ? flags.stroke_labels[i]
                                                        : flags.strokes_dirs[i] + "/labels.txt";
    append(load_strokes(flags.strokes_dirs[i], labels));
  }
  return corpus;
}

void print_param_report(const ParamReport& report) {
  std::printf("model %s  dataset %s\n", to_string(report.model).c_str(),
              to_string(report.dataset).c_str());
  for (const auto& group : report.groups) {
    std::printf("  %-28s", group.label.c_str());
    for (std::size_t i = 0; i < group.terms.size(); ++i) {
      std::printf("%s%zu", i ? " + " : "", group.terms[i]);
    }
    if (group.multiplier != 1) std::printf("  (x%zu)", group.multiplier);
    std::printf("  = %zu\n", group.subtotal());
  }
  std::printf("  %-28s%s\n", "total", report.arithmetic().c_str());
}

int cmd_train(ModelKind model, DatasetKind dataset, const DataFlags& data,
              ExperimentConfig cfg) {
  cfg.model = model;
  cfg.dataset = dataset;
  cfg.validate();
  Corpus corpus = load_corpus(dataset, data);
  RunReport report = run_experiment(cfg, corpus);
  std::printf("model %s  dataset %s  params %zu\n", to_string(model).c_str(),
              to_string(dataset).c_str(), report.params.total());
  for (const auto& run : report.runs) {
    if (run.failed) {
      std::printf("run %zu (seed %llu): FAILED: %s\n", run.run_index,
                  static_cast<unsigned long long>(run.seed), run.error.c_str());
    } else {
      std::printf("run %zu (seed %llu): test rate %.4f\n", run.run_index,
                  static_cast<unsigned long long>(run.seed), run.test_rate);
    }
  }
  if (report.successful >= 2) {
    std::printf("mean %.4f  ci99 half-width %.4f  (%zu/%zu runs)\n",
                report.rate_interval.mean, report.rate_interval.half_width, report.successful,
                report.runs.size());
  } else if (report.successful == 1) {
    std::printf("rate %.4f  (1/%zu runs; CI needs >= 2)\n", report.rate_interval.mean,
                report.runs.size());
  }
  std::printf("wall %.1fs\n", report.wall_seconds);
  if (!cfg.out_path.empty()) std::printf("report: %s\n", cfg.out_path.c_str());
  return report.successful == report.runs.size() ? 0 : 1;
}

int cmd_gradcheck(ModelKind model, DatasetKind dataset, const GradcheckProbe& probe,
                  double tolerance) {
  double worst = gradcheck_model(model, dataset, probe);
  const bool ok = worst <= tolerance;
  std::printf(
      "gradcheck %s/%s (steps %zu, h %.0e, seed %llu): max relative error %.3e -> %s\n",
      to_string(model).c_str(), to_string(dataset).c_str(), probe.steps, probe.h,
      static_cast<unsigned long long>(probe.seed), worst, ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_synth(DatasetKind dataset, std::size_t count, std::uint64_t seed,
              const std::string& images, const std::string& labels, const std::string& dir) {
  if (dataset == DatasetKind::spatial) {
    if (images.empty() || labels.empty()) {
      throw CLI::ValidationError("spatial synth needs --images and --labels output paths");
    }
    auto [imgs, labs] = synthetic_spatial_images(count, seed);
    write_idx_images(images, imgs);
    write_idx_labels(labels, labs);
    std::printf("wrote %zu images to %s, labels to %s\n", count, images.c_str(), labels.c_str());
  } else {
    if (dir.empty()) throw CLI::ValidationError("temporal synth needs --dir output directory");
    write_strokes(dir, synthetic_stroke_corpus(count, seed));
    std::printf("wrote %zu stroke samples to %s\n", count, dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stigmergic-memory sequence classification benchmark"};
  app.require_subcommand(1);

  std::string model_name = "sm-rnn";
  std::string dataset_name = "spatial";
  auto add_pairing = [&](CLI::App& cmd) {
    cmd.add_option("--model", model_name, "sm-rnn | ff-nn | rnn | lstm")
        ->check(CLI::IsMember({"sm-rnn", "ff-nn", "rnn", "lstm"}));
    cmd.add_option("--dataset", dataset_name, "spatial | temporal")
        ->check(CLI::IsMember({"spatial", "temporal"}));
  };

  // train
  auto* train = app.add_subcommand("train", "run a multi-run training experiment");
  add_pairing(*train);
  DataFlags data;
  add_data_flags(*train, data);
  ExperimentConfig cfg;
  std::optional<double> clip_norm;
  train->add_option("--epochs", cfg.train.epochs, "training epochs per run");
  train->add_option("--batch", cfg.train.batch_size, "mini-batch size");
  train->add_option("--runs", cfg.runs, "independent runs");
  train->add_option("--seed", cfg.train.seed, "base seed (run i uses seed+i)");
  train->add_option("--train-size", cfg.train_size, "training subset size");
  train->add_option("--test-size", cfg.test_size, "test subset size (0 = remainder)");
  train->add_option("--lr", cfg.adam.lr, "Adam learning rate");
  train->add_option("--clip-norm", clip_norm, "global gradient-norm clip threshold");
  train->add_option("--eval-every", cfg.train.eval_every, "curve snapshot cadence (iterations)");
  train->add_option("--out", cfg.out_path, "JSON report path; curve CSVs land next to it");

  // params
  auto* params = app.add_subcommand("params", "print the parameter-count arithmetic");
  add_pairing(*params);

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference gradient check at a verified probe point");
  add_pairing(*gradcheck);
  double gc_tol = 1e-4;
  auto* gc_seed = gradcheck->add_option("--seed", "model/stimulus seed");
  auto* gc_steps = gradcheck->add_option("--steps", "probe sequence length");
  auto* gc_h = gradcheck->add_option("--fd-step", "central-difference step size");
  gradcheck->add_option("--tolerance", gc_tol, "max allowed relative error");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset to disk");
  add_pairing(*synth);
  std::size_t synth_count = 1000;
  std::uint64_t synth_seed = 12345;
  std::string synth_images, synth_labels, synth_dir;
  synth->add_option("--count", synth_count, "number of samples");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--images", synth_images, "IDX image output path (spatial)");
  synth->add_option("--labels", synth_labels, "IDX label output path (spatial)");
  synth->add_option("--dir", synth_dir, "stroke output directory (temporal)");

  CLI11_PARSE(app, argc, argv);

  try {
    smrnn::ModelKind model = smrnn::model_kind_from_string(model_name);
    smrnn::DatasetKind dataset = smrnn::dataset_kind_from_string(dataset_name);
    if (train->parsed()) {
      cfg.train.clip_norm = clip_norm;
      return cmd_train(model, dataset, data, cfg);
    }
    if (params->parsed()) {
      print_param_report(smrnn::report_params(model, dataset));
      return 0;
    }
    if (gradcheck->parsed()) {
      smrnn::GradcheckProbe probe = smrnn::default_probe(model, dataset);
      if (*gc_seed) probe.seed = gc_seed->as<std::uint64_t>();
      if (*gc_steps) probe.steps = gc_steps->as<std::size_t>();
      if (*gc_h) probe.h = gc_h->as<double>();
      return cmd_gradcheck(model, dataset, probe, gc_tol);
    }
    if (synth->parsed()) {
      return cmd_synth(dataset, synth_count, synth_seed, synth_images, synth_labels, synth_dir);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
