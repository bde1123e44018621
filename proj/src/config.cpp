#include "cmon/config.hpp"

#include "cmon/clustering.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cmon {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_unsigned(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(ErrorKind::usage, "config '" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || std::isnan(out)) {
    fail(ErrorKind::usage, "config '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

template <class T>
ConfigKey count_key(std::string name, std::string help, T RunConfig::*field) {
  return {name, std::move(help),
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_unsigned<T>(name, v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

ConfigKey real_key(std::string name, std::string help, double RunConfig::*field) {
  return {name, std::move(help), [name, field](RunConfig& c, const std::string& v) { c.*field = parse_real(name, v); },
          [field](const RunConfig& c) { return format_real(c.*field); }};
}

ConfigKey text_key(std::string name, std::string help, std::string RunConfig::*field) {
  return {name, std::move(help), [field](RunConfig& c, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

}  // namespace

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<ConfigKey>& config_keys() {
  using C = RunConfig;
  static const std::vector<ConfigKey> keys = {
      text_key("data", "directory of IMS files or a synthetic spec file", &C::data),
      count_key("channels", "channels per file", &C::channels),
      count_key("train_files", "leading files used as the healthy training prefix", &C::train_files),
      count_key("train_row_stride", "train the map on every n-th training row", &C::train_row_stride),
      count_key("som_rows", "map rows", &C::som_rows),
      count_key("som_cols", "map columns", &C::som_cols),
      count_key("som_epochs", "training epochs", &C::som_epochs),
      count_key("som_seed", "map initialization and shuffling seed", &C::som_seed),
      real_key("som_initial_radius", "initial neighborhood radius (0 = max(rows, cols) / 2)", &C::som_initial_radius),
      real_key("som_final_radius", "final neighborhood radius", &C::som_final_radius),
      real_key("som_initial_rate", "initial learning rate", &C::som_initial_rate),
      real_key("som_final_rate", "final learning rate", &C::som_final_rate),
      real_key("som_neighborhood_cutoff", "skip units beyond cutoff * radius (0 = none)",
               &C::som_neighborhood_cutoff),
      text_key("threshold_method", "fixed_quantile | searched", &C::threshold_method),
      real_key("threshold_q", "quantile of training QEs used as the threshold", &C::threshold_q),
      real_key("verdict_fraction", "flagged-sample fraction that makes a window anomalous", &C::verdict_fraction),
      count_key("onset_run", "consecutive anomalous windows that define the onset", &C::onset_run),
      count_key("qe_csv_stride", "write every n-th sample to qe.csv", &C::qe_csv_stride),
      text_key("label_source", "som | truth", &C::label_source),
      real_key("split_fraction", "training share of the benchmark split", &C::split_fraction),
      count_key("split_seed", "benchmark split seed", &C::split_seed),
      real_key("logreg_lr", "logistic regression learning rate", &C::logreg_lr),
      count_key("logreg_iters", "logistic regression iterations", &C::logreg_iters),
      real_key("logreg_l2", "logistic regression L2 penalty", &C::logreg_l2),
      count_key("dtree_max_depth", "decision tree depth limit (0 = none)", &C::dtree_max_depth),
      count_key("dtree_min_leaf", "decision tree minimum leaf size", &C::dtree_min_leaf),
      count_key("rforest_trees", "random forest size", &C::rforest_trees),
      count_key("rforest_max_depth", "random forest depth limit (0 = none)", &C::rforest_max_depth),
      count_key("rforest_seed", "random forest seed", &C::rforest_seed),
      count_key("adaboost_rounds", "AdaBoost rounds", &C::adaboost_rounds),
      count_key("knn_k", "neighbours for k-NN", &C::knn_k),
      count_key("kmeans_k", "k-means cluster count", &C::kmeans_k),
      count_key("kmeans_max_iters", "k-means iteration cap", &C::kmeans_max_iters),
      count_key("kmeans_seed", "k-means seed", &C::kmeans_seed),
      text_key("agglo_linkage", "average | single | complete", &C::agglo_linkage),
      count_key("agglo_clusters", "flat clusters cut from the dendrogram", &C::agglo_clusters),
      count_key("optics_min_samples", "OPTICS min_samples", &C::optics_min_samples),
      real_key("optics_eps", "OPTICS neighbourhood radius (inf allowed)", &C::optics_eps),
      real_key("optics_extract_eps", "flat extraction radius (0 = automatic)", &C::optics_extract_eps),
      text_key("out", "output directory", &C::out),
  };
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  fail(ErrorKind::usage, "unknown config key '" + key + "'");
}

void validate(const RunConfig& c) {
  auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  require(c.channels >= 1, "channels must be >= 1");
  require(c.train_files >= 1, "train_files must be >= 1");
  require(c.train_row_stride >= 1, "train_row_stride must be >= 1");
  require(c.som_rows >= 1 && c.som_cols >= 1, "map dimensions must be >= 1");
  require(c.som_epochs >= 1, "som_epochs must be >= 1");
  require(c.threshold_method == "fixed_quantile" || c.threshold_method == "searched",
          "threshold_method must be fixed_quantile or searched");
  require(c.threshold_q >= 0.0 && c.threshold_q <= 1.0, "threshold_q must lie in [0, 1]");
  require(c.verdict_fraction > 0.0 && c.verdict_fraction <= 1.0, "verdict_fraction must lie in (0, 1]");
  require(c.onset_run >= 1, "onset_run must be >= 1");
  require(c.qe_csv_stride >= 1, "qe_csv_stride must be >= 1");
  require(c.label_source == "som" || c.label_source == "truth", "label_source must be som or truth");
  require(in_open_unit(c.split_fraction), "split_fraction must lie in (0, 1)");
  require(c.knn_k >= 1 && c.kmeans_k >= 1 && c.agglo_clusters >= 1, "cluster/neighbour counts must be >= 1");
  require(c.optics_min_samples >= 2, "optics_min_samples must be >= 2");
  require(c.optics_eps > 0.0, "optics_eps must be > 0");
  require(c.optics_extract_eps >= 0.0 && c.optics_extract_eps <= c.optics_eps,
          "optics_extract_eps must lie in [0, optics_eps]");
  (void)linkage_from_string(c.agglo_linkage);
}

std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::usage, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    kv[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

namespace {
std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}
}  // namespace

void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) set_config_value(cfg, k, v);
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_key_values(cfg, parse_key_values(read_text(path), path.string()));
  // Relative data paths are resolved against the config file's directory.
  if (!cfg.data.empty() && std::filesystem::path(cfg.data).is_relative()) {
    cfg.data = (std::filesystem::absolute(path).parent_path() / cfg.data).lexically_normal().string();
  }
  return cfg;
}

std::string config_snapshot(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

std::map<std::string, std::string> config_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  for (const auto& k : config_keys()) m[k.name] = k.get(cfg);
  return m;
}

SynthSpec synth_spec_from(const std::map<std::string, std::string>& kv) {
  SynthSpec s;
  for (const auto& [k, v] : kv) {
    if (k == "channels") s.channels = parse_unsigned<std::size_t>(k, v);
    else if (k == "windows") s.windows = parse_unsigned<std::size_t>(k, v);
    else if (k == "samples_per_window") s.samples_per_window = parse_unsigned<std::size_t>(k, v);
    else if (k == "fault_channel") s.fault_channel = parse_unsigned<std::size_t>(k, v);
    else if (k == "onset_window") s.onset_window = parse_unsigned<std::size_t>(k, v);
    else if (k == "fault_amplitude_growth") s.fault_amplitude_growth = parse_real(k, v);
    else if (k == "noise_sigma") s.noise_sigma = parse_real(k, v);
    else if (k == "seed") s.seed = parse_unsigned<std::uint64_t>(k, v);
    else if (k == "impulse_period") s.impulse_period = parse_unsigned<std::size_t>(k, v);
    else if (k == "impulse_width") s.impulse_width = parse_unsigned<std::size_t>(k, v);
    else if (k == "sample_rate_hz") s.sample_rate_hz = parse_real(k, v);
    else fail(ErrorKind::usage, "unknown synthetic spec key '" + k + "'");
  }
  validate(s);
  return s;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return synth_spec_from(parse_key_values(read_text(path), path.string()));
}

std::string synth_spec_text(const SynthSpec& s) {
  std::ostringstream o;
  o << "channels = " << s.channels << "\nwindows = " << s.windows << "\nsamples_per_window = " << s.samples_per_window
    << "\nfault_channel = " << s.fault_channel << "\nonset_window = " << s.onset_window
    << "\nfault_amplitude_growth = " << format_real(s.fault_amplitude_growth)
    << "\nnoise_sigma = " << format_real(s.noise_sigma) << "\nseed = " << s.seed
    << "\nimpulse_period = " << s.impulse_period << "\nimpulse_width = " << s.impulse_width
    << "\nsample_rate_hz = " << format_real(s.sample_rate_hz) << "\n";
  return o.str();
}

}  // namespace cmon
