#pragma once

// End-to-end orchestration: train -> detect -> localize -> label -> benchmark
// -> report. Each stage reads its inputs from and writes its artifacts to
// RunConfig::out, together with a JSON run manifest.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmon/clustering.hpp"
#include "cmon/config.hpp"
#include "cmon/detect.hpp"
#include "cmon/ingest.hpp"
#include "cmon/labeling.hpp"
#include "cmon/learners.hpp"
#include "cmon/metrics.hpp"
#include "cmon/som.hpp"

namespace cmon {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Windows of a run, either IMS files on disk (loaded on demand) or a synthetic
// dataset generated from a spec file.
class WindowSource {
 public:
  static WindowSource open(const RunConfig& cfg);

  std::size_t size() const noexcept { return ids_.size(); }
  Window load(std::size_t i) const;
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::optional<std::vector<WindowTruth>>& truth() const noexcept { return truth_; }
  // (input name, FNV-1a hex digest) for the manifest
  const std::vector<std::pair<std::string, std::string>>& digests() const noexcept { return digests_; }

 private:
  std::size_t channels_ = 0;
  std::vector<std::filesystem::path> files_;
  std::vector<Window> synthetic_;
  std::vector<std::string> ids_;
  std::optional<std::vector<WindowTruth>> truth_;
  std::vector<std::pair<std::string, std::string>> digests_;
};

struct TrainedMap {
  SomGrid grid;
  NormParams normalizer;
  Threshold threshold;
};

nlohmann::json to_json(const TrainedMap& m);
TrainedMap trained_map_from_json(const nlohmann::json& j);
TrainedMap load_trained_map(const std::filesystem::path& path);

struct TrainOutcome {
  std::size_t training_files = 0;
  std::size_t training_samples = 0;  // every row of the training prefix
  std::size_t som_samples = 0;       // rows after striding
  double qe_min = 0, qe_median = 0, qe_mean = 0, qe_max = 0;
  Threshold threshold;
};

struct DetectOutcome {
  std::size_t windows = 0;
  std::size_t anomalous_windows = 0;
  std::optional<std::size_t> onset_window;
  std::optional<Timestamp> onset_timestamp;
  Threshold threshold;
  std::optional<ThresholdSearch> search;
};

struct LocalizeOutcome {
  bool any_anomaly = false;
  std::optional<std::size_t> channel;
  std::size_t range_first = 0, range_last = 0;
  std::vector<std::size_t> counts;
  std::size_t anomalous_samples = 0;
  std::size_t attributed_to_channel = 0;  // anomalous samples whose top channel is `channel`
};

struct LabelOutcome {
  ImbalanceReport imbalance;
  Provenance provenance = Provenance::som_derived;
  std::optional<double> truth_agreement;  // share of windows whose label matches the synthetic truth
};

struct EvalRow {
  std::string algorithm;
  bool supervised = false;
  ConfusionMatrix confusion;
  Scores scores;
  double auc = 0.0;
  RocCurve roc;
};

struct BenchmarkResult {
  std::vector<EvalRow> rows;
  std::vector<std::pair<std::string, Model>> models;
  std::vector<std::pair<std::string, std::vector<int>>> clusterings;
  double kmeans_silhouette = 0.0;
  double agglomerative_cpcc = 0.0;
  double optics_extract_eps = 0.0;
  std::size_t train_items = 0, test_items = 0;

  const EvalRow& row(const std::string& algorithm) const;
};

// Splits, fits every learner and scores the held-out items. Clusterers run on
// all items; clusters are mapped to labels using training-split items only.
BenchmarkResult run_benchmark(const LabeledDataset& data, const RunConfig& cfg);

struct ReportOutcome {
  std::filesystem::path report;
  std::vector<std::filesystem::path> bundle;
};

void cmd_synth(const SynthSpec& spec, const std::filesystem::path& dir);
TrainOutcome cmd_train(const RunConfig& cfg);
DetectOutcome cmd_detect(const RunConfig& cfg);
LocalizeOutcome cmd_localize(const RunConfig& cfg);
LabelOutcome cmd_label(const RunConfig& cfg);
BenchmarkResult cmd_benchmark(const RunConfig& cfg);
ReportOutcome cmd_report(const std::filesystem::path& run_dir);

// All stages in order.
void run_all(const RunConfig& cfg);

// Config recorded in a manifest (or a report.json), ready to re-run.
RunConfig config_from_manifest(const std::filesystem::path& manifest);

int exit_code(ErrorKind kind);

}  // namespace cmon
