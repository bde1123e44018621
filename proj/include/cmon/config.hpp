#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cmon/ingest.hpp"

namespace cmon {

// Everything a pipeline run depends on. Desk-scale defaults; see
// configs/ims_set2_full.cfg for the full-scale profile.
struct RunConfig {
  std::string data;  // directory of IMS files, or a synthetic spec file
  std::size_t channels = 4;
  std::size_t train_files = 90;      // leading files that represent the healthy condition
  std::size_t train_row_stride = 8;  // SOM trains on every n-th row of the training prefix

  std::size_t som_rows = 20;
  std::size_t som_cols = 20;
  std::size_t som_epochs = 30;
  std::uint64_t som_seed = 42;
  double som_initial_radius = 0.0;  // 0 = max(rows, cols) / 2
  double som_final_radius = 1.0;
  double som_initial_rate = 0.5;
  double som_final_rate = 0.01;
  double som_neighborhood_cutoff = 0.0;

  std::string threshold_method = "fixed_quantile";
  double threshold_q = 0.9999;
  double verdict_fraction = 0.05;
  std::size_t onset_run = 3;
  std::size_t qe_csv_stride = 1;

  std::string label_source = "som";  // som | truth

  double split_fraction = 0.8;
  std::uint64_t split_seed = 1;

  double logreg_lr = 0.1;
  std::size_t logreg_iters = 2000;
  double logreg_l2 = 1e-4;
  std::size_t dtree_max_depth = 0;
  std::size_t dtree_min_leaf = 1;
  std::size_t rforest_trees = 100;
  std::size_t rforest_max_depth = 0;
  std::uint64_t rforest_seed = 17;
  std::size_t adaboost_rounds = 100;
  std::size_t knn_k = 5;
  std::size_t kmeans_k = 2;
  std::size_t kmeans_max_iters = 300;
  std::uint64_t kmeans_seed = 3;
  std::string agglo_linkage = "average";
  std::size_t agglo_clusters = 2;
  std::size_t optics_min_samples = 5;
  double optics_eps = std::numeric_limits<double>::infinity();
  double optics_extract_eps = 0.0;  // 0 = 0.9 quantile of finite reachability distances

  std::string out;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_keys();

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
void validate(const RunConfig& cfg);

// "key = value" lines; '#' starts a comment. Unknown keys are errors.
std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& origin);
RunConfig load_config(const std::filesystem::path& path);
void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv);

// Every key in table order, one "key = value" line each.
std::string config_snapshot(const RunConfig& cfg);
std::map<std::string, std::string> config_map(const RunConfig& cfg);

SynthSpec load_synth_spec(const std::filesystem::path& path);
SynthSpec synth_spec_from(const std::map<std::string, std::string>& kv);
std::string synth_spec_text(const SynthSpec& spec);

std::string format_real(double v);

}  // namespace cmon
