#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cmon/pipeline.hpp"

namespace {

using namespace cmon;

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

struct Common {
  std::string config;
  std::string out;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* app, Common& common) {
  app->add_option("-c,--config", common.config, "key = value config file");
  app->add_option("-o,--out", common.out, "output directory (default: $CMON_OUTPUT_ROOT/<subcommand>)");
  for (const ConfigKey& key : config_keys()) {
    if (key.name == "out") continue;
    app->add_option_function<std::string>(
           flag_name(key.name), [&common, name = key.name](const std::string& v) { common.overrides[name] = v; },
           key.help)
        ->type_name("VALUE");
  }
}

RunConfig resolve(const Common& common, const std::string& subcommand) {
  RunConfig cfg = common.config.empty() ? RunConfig{} : load_config(common.config);
  apply_key_values(cfg, common.overrides);
  // manifests must replay from any working directory
  if (!cfg.data.empty()) cfg.data = std::filesystem::absolute(cfg.data).lexically_normal().string();
  if (!common.out.empty()) {
    cfg.out = common.out;
  } else if (cfg.out.empty()) {
    const char* root = std::getenv("CMON_OUTPUT_ROOT");
    cfg.out = (std::filesystem::path(root && *root ? root : "cmon-out") / subcommand).string();
  }
  validate(cfg);
  return cfg;
}

void print_train(const TrainOutcome& t) {
  std::printf("trained on %zu files, %zu samples (%zu used for the map)\n", t.training_files, t.training_samples,
              t.som_samples);
  std::printf("training QE: min %.6g  median %.6g  mean %.6g  max %.6g\n", t.qe_min, t.qe_median, t.qe_mean, t.qe_max);
  std::printf("threshold tau = %.9g (%s, q = %g)\n", t.threshold.tau, to_string(t.threshold.method),
              t.threshold.quantile_q);
}

void print_detect(const DetectOutcome& d) {
  std::printf("%zu of %zu windows anomalous\n", d.anomalous_windows, d.windows);
  if (d.search) std::printf("searched threshold: q = %g, F1 = %.4f\n", d.search->best_q, d.search->best_score);
  if (d.onset_window) {
    std::printf("onset: window %zu (%s)\n", *d.onset_window, format_iso8601(*d.onset_timestamp).c_str());
  } else {
    std::printf("no sustained anomaly\n");
  }
}

void print_localize(const LocalizeOutcome& l) {
  if (!l.any_anomaly) {
    std::printf("no anomalous samples; nothing to attribute\n");
    return;
  }
  std::printf("fault attributed to channel %zu (windows %zu..%zu)\n", *l.channel, l.range_first, l.range_last - 1);
}

void print_label(const LabelOutcome& l) {
  std::printf("%zu normal, %zu fault (%s)\n", l.imbalance.normal, l.imbalance.fault, to_string(l.provenance));
  if (l.truth_agreement) std::printf("agreement with truth: %.4f\n", *l.truth_agreement);
}

void print_benchmark(const BenchmarkResult& b) {
  std::printf("%-14s %8s %9s %8s %8s %8s\n", "algorithm", "f1", "precision", "recall", "accuracy", "auc");
  for (const auto& r : b.rows) {
    std::printf("%-14s %8.4f %9.4f %8.4f %8.4f %8.4f%s\n", r.algorithm.c_str(), r.scores.f1, r.scores.precision,
                r.scores.recall, r.scores.accuracy, r.auc, r.scores.degenerate ? "  (degenerate)" : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cmon: SOM-based condition monitoring for multi-channel vibration data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string synth_spec, synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic IMS-style dataset with truth.csv");
  synth->add_option("-s,--spec", synth_spec, "synthetic spec file (defaults used when omitted)");
  synth->add_option("-o,--out", synth_out, "dataset directory")->required();

  Common common;
  std::map<std::string, CLI::App*> stages;
  const std::pair<const char*, const char*> stage_help[] = {
      {"train", "fit the normalizer, train the map and fix the QE threshold"},
      {"detect", "score every window, flag samples and report the onset"},
      {"localize", "per-window channel histograms and fault attribution"},
      {"label", "build the labeled feature dataset"},
      {"benchmark", "split, fit all eight learners and score them"},
      {"run", "all stages, then report"}};
  for (const auto& [name, help] : stage_help) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, common);
    stages[name] = sub;
  }
  std::string report_dir;
  auto* report = app.add_subcommand("report", "merge manifests and write the plot-data bundle");
  report->add_option("run_dir", report_dir, "run output directory")->required();

  std::string manifest, replay_out;
  auto* replay = app.add_subcommand("replay", "re-run every stage from a manifest or report.json");
  replay->add_option("manifest", manifest, "manifest or report.json")->required();
  replay->add_option("-o,--out", replay_out, "output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      cmd_synth(synth_spec.empty() ? SynthSpec{} : load_synth_spec(synth_spec), synth_out);
      std::printf("wrote synthetic dataset to %s\n", synth_out.c_str());
    } else if (report->parsed()) {
      const auto r = cmd_report(report_dir);
      std::printf("wrote %s and %zu bundle files\n", r.report.string().c_str(), r.bundle.size());
    } else if (replay->parsed()) {
      RunConfig cfg = config_from_manifest(manifest);
      if (!replay_out.empty()) cfg.out = replay_out;
      validate(cfg);
      run_all(cfg);
      std::printf("replayed into %s\n", cfg.out.c_str());
    } else if (stages["train"]->parsed()) {
      print_train(cmd_train(resolve(common, "train")));
    } else if (stages["detect"]->parsed()) {
      print_detect(cmd_detect(resolve(common, "detect")));
    } else if (stages["localize"]->parsed()) {
      print_localize(cmd_localize(resolve(common, "localize")));
    } else if (stages["label"]->parsed()) {
      print_label(cmd_label(resolve(common, "label")));
    } else if (stages["benchmark"]->parsed()) {
      print_benchmark(cmd_benchmark(resolve(common, "benchmark")));
    } else if (stages["run"]->parsed()) {
      const RunConfig cfg = resolve(common, "run");
      print_train(cmd_train(cfg));
      print_detect(cmd_detect(cfg));
      print_localize(cmd_localize(cfg));
      print_label(cmd_label(cfg));
      print_benchmark(cmd_benchmark(cfg));
      cmd_report(cfg.out);
      std::printf("artifacts in %s\n", cfg.out.c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "cmon: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "cmon: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cmon: internal error: %s\n", e.what());
    return 3;
  }
  return 0;
}
