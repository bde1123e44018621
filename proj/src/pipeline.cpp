#include "cmon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "cmon/hash.hpp"
#include "cmon/localize.hpp"

namespace cmon {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + p.string());
  out << text;
  if (!out) fail(ErrorKind::io, "write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    fail(ErrorKind::format, p.string() + ": " + e.what());
  }
}

std::string digest_hex(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return to_hex(h.digest());
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

fs::path out_dir(const RunConfig& cfg) {
  require(!cfg.out.empty(), "no output directory configured");
  fs::create_directories(cfg.out);
  return cfg.out;
}

fs::path need(const fs::path& dir, const char* file, const char* stage) {
  const fs::path p = dir / file;
  if (!fs::exists(p)) {
    fail(ErrorKind::consistency, std::string("missing ") + file + " in " + dir.string() + "; run the '" + stage +
                                     "' stage first");
  }
  return p;
}

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_manifest(const RunConfig& cfg, const std::string& stage, const WindowSource* src, json timings,
                    const std::vector<std::string>& artifacts, json extra = json::object()) {
  json m;
  m["schema_version"] = kSchemaVersion;
  m["stage"] = stage;
  m["tool_version"] = kToolVersion;
  m["config"] = config_map(cfg);
  m["seeds"] = {{"som_seed", cfg.som_seed},       {"split_seed", cfg.split_seed}, {"rforest_seed", cfg.rforest_seed},
                {"kmeans_seed", cfg.kmeans_seed}};
  m["inputs"] = json::array();
  if (src) {
    for (const auto& [name, dig] : src->digests()) m["inputs"].push_back({{"name", name}, {"digest", dig}});
  }
  m["timings_ms"] = std::move(timings);
  m["artifacts"] = artifacts;
  m["details"] = std::move(extra);
  const fs::path dir = out_dir(cfg);
  write_json(dir / (stage + "_manifest.json"), m);
  write_text(dir / "config.snapshot", config_snapshot(cfg));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

NormalizedWindow normalized(const TrainedMap& map, const Window& w) {
  if (w.channels() != map.grid.dim) {
    fail(ErrorKind::usage, "window has " + std::to_string(w.channels()) + " channels but the map expects " +
                               std::to_string(map.grid.dim));
  }
  return normalize_window(map.normalizer, w);
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return 1;
    case ErrorKind::io:
    case ErrorKind::format:
    case ErrorKind::parse: return 2;
    case ErrorKind::consistency:
    case ErrorKind::degenerate:
    case ErrorKind::no_anomaly: return 3;
  }
  return 3;
}

// ---- data source ------------------------------------------------------------

WindowSource WindowSource::open(const RunConfig& cfg) {
  WindowSource src;
  src.channels_ = cfg.channels;
  require(!cfg.data.empty(), "no data source configured (set 'data')");
  const fs::path data = cfg.data;
  std::error_code ec;
  if (fs::is_directory(data, ec)) {
    src.files_ = list_ims_files(data);
    if (src.files_.empty()) fail(ErrorKind::io, "no IMS files (YYYY.MM.DD.hh.mm.ss) in " + data.string());
    for (const auto& f : src.files_) {
      src.ids_.push_back(f.filename().string());
      src.digests_.emplace_back(f.filename().string(), digest_hex(read_text(f)));
    }
    if (fs::exists(data / "truth.csv")) {
      src.truth_ = read_truth_csv(data / "truth.csv");
      if (src.truth_->size() != src.files_.size()) {
        fail(ErrorKind::consistency, "truth.csv has " + std::to_string(src.truth_->size()) + " rows for " +
                                         std::to_string(src.files_.size()) + " files");
      }
      src.digests_.emplace_back("truth.csv", digest_hex(read_text(data / "truth.csv")));
    }
  } else if (fs::is_regular_file(data, ec)) {
    const std::string text = read_text(data);
    const SynthSpec spec = synth_spec_from(parse_key_values(text, data.string()));
    if (spec.channels != cfg.channels) {
      fail(ErrorKind::usage, "synthetic spec has " + std::to_string(spec.channels) + " channels, config says " +
                                 std::to_string(cfg.channels));
    }
    SyntheticDataset ds = generate_synthetic(spec);
    for (const auto& w : ds.windows) src.ids_.push_back(format_ims_timestamp(w.timestamp));
    src.synthetic_ = std::move(ds.windows);
    src.truth_ = std::move(ds.truth);
    src.digests_.emplace_back(data.filename().string(), digest_hex(text));
  } else {
    fail(ErrorKind::io, "data source does not exist: " + data.string());
  }
  return src;
}

Window WindowSource::load(std::size_t i) const {
  if (!synthetic_.empty()) return synthetic_.at(i);
  return read_ims_file(files_.at(i), channels_);
}

// ---- trained map container --------------------------------------------------

json to_json(const TrainedMap& m) {
  return {{"format", "cmon.trained_map"},
          {"version", 1},
          {"map", to_json(m.grid)},
          {"normalizer",
           {{"min", m.normalizer.min}, {"max", m.normalizer.max}, {"fingerprint", to_hex(m.normalizer.fingerprint())}}},
          {"threshold", to_json(m.threshold)}};
}

TrainedMap trained_map_from_json(const json& j) {
  try {
    if (j.at("format") != "cmon.trained_map" || j.at("version") != 1) {
      fail(ErrorKind::format, "not a version-1 trained map");
    }
    TrainedMap m;
    m.grid = grid_from_json(j.at("map"));
    m.normalizer.min = j.at("normalizer").at("min").get<std::vector<double>>();
    m.normalizer.max = j.at("normalizer").at("max").get<std::vector<double>>();
    m.threshold = threshold_from_json(j.at("threshold"));
    if (m.normalizer.fingerprint() != m.grid.norm_fingerprint) {
      fail(ErrorKind::usage, "normalizer fingerprint " + to_hex(m.normalizer.fingerprint()) +
                                 " does not match the map's " + to_hex(m.grid.norm_fingerprint));
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("malformed trained map: ") + e.what());
  }
}

TrainedMap load_trained_map(const fs::path& path) { return trained_map_from_json(read_json(path)); }

// ---- synth ------------------------------------------------------------------

void cmd_synth(const SynthSpec& spec, const fs::path& dir) {
  const SyntheticDataset ds = generate_synthetic(spec);
  write_synthetic(ds, dir);
  write_text(dir / "synth.spec", synth_spec_text(spec));
}

// ---- train ------------------------------------------------------------------

TrainOutcome cmd_train(const RunConfig& cfg) {
  validate(cfg);
  Stopwatch sw;
  const WindowSource src = WindowSource::open(cfg);
  if (src.size() < cfg.train_files) {
    fail(ErrorKind::usage, "train_files = " + std::to_string(cfg.train_files) + " but only " +
                               std::to_string(src.size()) + " windows are available");
  }
  std::vector<Window> prefix;
  prefix.reserve(cfg.train_files);
  for (std::size_t i = 0; i < cfg.train_files; ++i) prefix.push_back(src.load(i));
  const double t_load = sw.lap_ms();

  TrainedMap map;
  map.normalizer = fit_normalizer(prefix);
  std::vector<NormalizedWindow> norm;
  norm.reserve(prefix.size());
  for (const auto& w : prefix) norm.push_back(normalize_window(map.normalizer, w));
  prefix.clear();

  TrainOutcome out;
  out.training_files = cfg.train_files;
  Matrix samples;
  std::size_t global_row = 0;
  for (const auto& w : norm) {
    for (std::size_t r = 0; r < w.values.rows(); ++r, ++global_row) {
      if (global_row % cfg.train_row_stride == 0) samples.append_row(w.values.row(r));
    }
  }
  out.training_samples = global_row;
  out.som_samples = samples.rows();

  TrainSchedule schedule;
  schedule.epochs = cfg.som_epochs;
  schedule.initial_radius = cfg.som_initial_radius;
  schedule.final_radius = cfg.som_final_radius;
  schedule.initial_rate = cfg.som_initial_rate;
  schedule.final_rate = cfg.som_final_rate;
  schedule.neighborhood_cutoff = cfg.som_neighborhood_cutoff;

  SomGrid grid = init_grid(cfg.som_rows, cfg.som_cols, samples, cfg.som_seed);
  grid.norm_fingerprint = map.normalizer.fingerprint();
  map.grid = train(std::move(grid), samples, schedule, mix_seed(cfg.som_seed, 1));
  const double t_train = sw.lap_ms();

  const QeSeries qes = batch_qe(map.grid, norm);
  map.threshold = fit_threshold_fixed(qes.qe, cfg.threshold_q);
  std::vector<double> sorted = qes.qe;
  std::sort(sorted.begin(), sorted.end());
  out.qe_min = sorted.front();
  out.qe_max = sorted.back();
  out.qe_median = quantile_sorted(sorted, 0.5);
  out.qe_mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  out.threshold = map.threshold;
  const double t_qe = sw.lap_ms();

  const fs::path dir = out_dir(cfg);
  write_json(dir / "som.json", to_json(map));
  write_json(dir / "threshold.json", to_json(map.threshold));
  write_manifest(cfg, "train", &src, {{"load", t_load}, {"train", t_train}, {"training_qe", t_qe}},
                 {"som.json", "threshold.json"},
                 {{"training_files", out.training_files},
                  {"training_samples", out.training_samples},
                  {"som_samples", out.som_samples},
                  {"training_qe", {{"min", out.qe_min}, {"median", out.qe_median}, {"mean", out.qe_mean},
                                   {"max", out.qe_max}}}});
  return out;
}

// ---- detect -----------------------------------------------------------------

DetectOutcome cmd_detect(const RunConfig& cfg) {
  validate(cfg);
  Stopwatch sw;
  const fs::path dir = out_dir(cfg);
  const TrainedMap map = load_trained_map(need(dir, "som.json", "train"));
  if (map.grid.dim != cfg.channels) {
    fail(ErrorKind::usage, "map was trained on " + std::to_string(map.grid.dim) + " channels, config says " +
                               std::to_string(cfg.channels));
  }
  const WindowSource src = WindowSource::open(cfg);

  QeSeries series;
  for (std::size_t i = 0; i < src.size(); ++i) append_qe(series, map.grid, normalized(map, src.load(i)), i);
  const double t_qe = sw.lap_ms();

  DetectOutcome out;
  out.windows = src.size();
  out.threshold = map.threshold;
  if (threshold_method_from_string(cfg.threshold_method) == ThresholdMethod::searched) {
    if (!src.truth()) fail(ErrorKind::usage, "threshold_method = searched needs labels (truth.csv) for the data");
    std::vector<std::uint8_t> labels(series.size());
    for (const QeWindow& w : series.windows) {
      std::fill_n(labels.begin() + static_cast<std::ptrdiff_t>(w.offset), w.rows,
                  (*src.truth())[w.window_id].anomalous ? 1 : 0);
    }
    const auto grid = default_q_grid();
    out.search = search_threshold(series.qe, labels, grid);
    out.threshold = out.search->threshold;
  }

  const auto flags = classify(series.qe, out.threshold);
  const auto verdicts = window_verdicts(series, flags, cfg.verdict_fraction);
  out.onset_window = find_onset(verdicts, cfg.onset_run);
  if (out.onset_window) out.onset_timestamp = verdicts[*out.onset_window].timestamp;
  for (const auto& v : verdicts) out.anomalous_windows += v.anomalous;

  {
    std::ofstream qe(dir / "qe.csv", std::ios::binary);
    if (!qe) fail(ErrorKind::io, "cannot write qe.csv");
    qe << "timestamp,window_id,row_index,qe,flag\n";
    for (const QeWindow& w : series.windows) {
      const std::string ts = format_iso8601(w.timestamp);
      for (std::size_t r = 0; r < w.rows; r += cfg.qe_csv_stride) {
        qe << ts << ',' << w.window_id << ',' << r << ',' << g9(series.qe[w.offset + r]) << ','
           << int(flags[w.offset + r]) << '\n';
      }
    }
  }
  {
    std::ofstream wv(dir / "windows.csv", std::ios::binary);
    if (!wv) fail(ErrorKind::io, "cannot write windows.csv");
    wv << "window_id,timestamp,rows,flagged,fraction,verdict\n";
    for (const auto& v : verdicts) {
      wv << v.window_id << ',' << format_iso8601(v.timestamp) << ',' << v.rows << ',' << v.flagged << ','
         << fixed6(v.fraction()) << ',' << (v.anomalous ? "anomalous" : "normal") << '\n';
    }
  }
  json onset = {{"schema_version", kSchemaVersion},
                {"threshold", to_json(out.threshold)},
                {"run_length", cfg.onset_run},
                {"verdict_fraction", cfg.verdict_fraction},
                {"windows", out.windows},
                {"anomalous_windows", out.anomalous_windows},
                {"last_timestamp", verdicts.empty() ? "" : format_iso8601(verdicts.back().timestamp)}};
  if (out.onset_window) {
    onset["onset_window"] = *out.onset_window;
    onset["onset_timestamp"] = format_iso8601(*out.onset_timestamp);
    const auto lead = std::chrono::duration_cast<std::chrono::minutes>(verdicts.back().timestamp - *out.onset_timestamp);
    onset["lead_time_hours"] = static_cast<double>(lead.count()) / 60.0;
  } else {
    onset["onset_window"] = nullptr;
    onset["onset_timestamp"] = nullptr;
  }
  if (out.search) {
    json curve = json::array();
    for (const auto& [q, f1] : out.search->curve) curve.push_back({q, f1});
    onset["search"] = {{"best_q", out.search->best_q}, {"best_f1", out.search->best_score}, {"curve", curve}};
  }
  write_json(dir / "onset.json", onset);
  write_manifest(cfg, "detect", &src, {{"qe", t_qe}, {"classify", sw.lap_ms()}},
                 {"qe.csv", "windows.csv", "onset.json"});
  return out;
}

// ---- localize ---------------------------------------------------------------

LocalizeOutcome cmd_localize(const RunConfig& cfg) {
  validate(cfg);
  Stopwatch sw;
  const fs::path dir = out_dir(cfg);
  const TrainedMap map = load_trained_map(need(dir, "som.json", "train"));
  const json onset = read_json(need(dir, "onset.json", "detect"));
  const Threshold threshold = threshold_from_json(onset.at("threshold"));
  const WindowSource src = WindowSource::open(cfg);

  std::vector<OccurrenceHistogram> hist;
  hist.reserve(src.size());
  LocalizeOutcome out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const NormalizedWindow nw = normalized(map, src.load(i));
    QeSeries one;
    append_qe(one, map.grid, nw, i);
    const auto flags = classify(one.qe, threshold);
    auto h = occurrence_histogram(map.grid, std::span<const NormalizedWindow>(&nw, 1), flags);
    h.front().window_id = i;
    for (std::size_t c : h.front().counts) out.anomalous_samples += c;
    hist.push_back(std::move(h.front()));
  }
  out.any_anomaly = out.anomalous_samples > 0;

  json attribution = {{"schema_version", kSchemaVersion}};
  {
    std::ofstream hc(dir / "histograms.csv", std::ios::binary);
    if (!hc) fail(ErrorKind::io, "cannot write histograms.csv");
    hc << "window_timestamp";
    for (std::size_t c = 0; c < map.grid.dim; ++c) hc << ",count_ch" << c;
    hc << '\n';
    if (out.any_anomaly) {
      for (const auto& h : hist) {
        hc << format_iso8601(h.timestamp);
        for (std::size_t v : h.counts) hc << ',' << v;
        hc << '\n';
      }
    }
  }
  if (!out.any_anomaly) {
    attribution["result"] = "no_anomaly";
  } else {
    out.range_first = onset.at("onset_window").is_null() ? 0 : onset.at("onset_window").get<std::size_t>();
    out.range_last = hist.size();
    try {
      out.channel = attribute_fault(hist, out.range_first, out.range_last);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_anomaly) throw;
      out.range_first = 0;
      out.channel = attribute_fault(hist, out.range_first, out.range_last);
    }
    out.counts.assign(map.grid.dim, 0);
    for (std::size_t i = out.range_first; i < out.range_last; ++i) {
      for (std::size_t c = 0; c < out.counts.size(); ++c) out.counts[c] += hist[i].counts[c];
    }
    for (const auto& h : hist) out.attributed_to_channel += h.counts[*out.channel];
    attribution["result"] = "attributed";
    attribution["window_range"] = {out.range_first, out.range_last};
    attribution["first_timestamp"] = format_iso8601(hist[out.range_first].timestamp);
    attribution["channel"] = *out.channel;
    attribution["counts"] = out.counts;
  }
  write_json(dir / "attribution.json", attribution);
  write_manifest(cfg, "localize", &src, {{"localize", sw.lap_ms()}}, {"histograms.csv", "attribution.json"});
  return out;
}

// ---- label ------------------------------------------------------------------

LabelOutcome cmd_label(const RunConfig& cfg) {
  validate(cfg);
  Stopwatch sw;
  const fs::path dir = out_dir(cfg);
  const WindowSource src = WindowSource::open(cfg);

  std::vector<FeatureVector> features;
  features.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) features.push_back(extract_features(src.load(i)));

  LabeledDataset ds;
  if (cfg.label_source == "truth") {
    if (!src.truth()) fail(ErrorKind::usage, "label_source = truth needs truth.csv or a synthetic data source");
    ds = labels_from_truth(*src.truth(), features);
  } else {
    std::vector<bool> verdict_bits;
    {
      std::ifstream in(need(dir, "windows.csv", "detect"));
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 6) fail(ErrorKind::format, "windows.csv: malformed row");
        verdict_bits.push_back(cells[5] == "anomalous");
      }
    }
    if (verdict_bits.size() != src.size()) {
      fail(ErrorKind::consistency, "windows.csv covers " + std::to_string(verdict_bits.size()) +
                                       " windows but the data source has " + std::to_string(src.size()));
    }
    std::vector<std::optional<std::size_t>> attributions(src.size());
    {
      std::ifstream in(need(dir, "histograms.csv", "localize"));
      std::string line;
      std::getline(in, line);
      std::size_t i = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (i >= src.size() || cells.size() != cfg.channels + 1) fail(ErrorKind::format, "histograms.csv: bad row");
        std::size_t best = 0, best_count = 0;
        for (std::size_t c = 0; c < cfg.channels; ++c) {
          const std::size_t v = std::stoul(cells[c + 1]);
          if (v > best_count) {
            best_count = v;
            best = c;
          }
        }
        if (best_count > 0) attributions[i] = best;
        ++i;
      }
    }
    // vector<bool> is not contiguous
    auto verdicts = std::make_unique<bool[]>(verdict_bits.size());
    for (std::size_t i = 0; i < verdict_bits.size(); ++i) verdicts[i] = verdict_bits[i];
    ds = derive_labels(std::span<const bool>(verdicts.get(), verdict_bits.size()), attributions, features);
  }

  LabelOutcome out;
  out.provenance = ds.provenance;
  out.imbalance = imbalance_report(ds);
  if (src.truth()) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < ds.items.size(); ++i) agree += is_fault(ds.items[i].label) == (*src.truth())[i].anomalous;
    out.truth_agreement = static_cast<double>(agree) / static_cast<double>(ds.items.size());
  }
  write_labeled_csv(ds, dir / "labeled.csv");

  json labels = {{"schema_version", kSchemaVersion},
                 {"provenance", to_string(ds.provenance)},
                 {"threshold_method", cfg.threshold_method},
                 {"threshold_q", cfg.threshold_q},
                 {"items", ds.items.size()},
                 {"imbalance",
                  {{"normal", out.imbalance.normal},
                   {"fault", out.imbalance.fault},
                   {"per_bearing", out.imbalance.per_bearing},
                   {"ratio", out.imbalance.single_class ? json("inf") : json(out.imbalance.ratio)},
                   {"single_class", out.imbalance.single_class}}}};
  if (out.truth_agreement) labels["truth_agreement"] = *out.truth_agreement;
  write_json(dir / "labels.json", labels);
  write_manifest(cfg, "label", &src, {{"label", sw.lap_ms()}}, {"labeled.csv", "labels.json"});
  return out;
}

// ---- benchmark --------------------------------------------------------------

const EvalRow& BenchmarkResult::row(const std::string& algorithm) const {
  for (const auto& r : rows) {
    if (r.algorithm == algorithm) return r;
  }
  fail(ErrorKind::usage, "no evaluation row for '" + algorithm + "'");
}

namespace {

EvalRow evaluate(std::string name, bool supervised, std::span<const Label> truth, std::span<const Label> predicted,
                 std::span<const double> scores) {
  EvalRow r;
  r.algorithm = std::move(name);
  r.supervised = supervised;
  r.confusion = confusion(predicted, truth);
  r.scores = prf_accuracy(r.confusion);
  r.roc = roc_auc(scores, truth);
  r.auc = r.roc.auc;
  return r;
}

double auto_extract_eps(const Clustering& c) {
  std::vector<double> finite;
  for (double r : c.reachability) {
    if (!std::isinf(r)) finite.push_back(r);
  }
  if (finite.empty()) return kUnbounded;
  return quantile(finite, 0.9);
}

}  // namespace

BenchmarkResult run_benchmark(const LabeledDataset& data, const RunConfig& cfg) {
  const Matrix x = data.feature_matrix();
  const std::vector<Label> y = data.labels();
  const SplitIndices split = split_indices(x.rows(), cfg.split_fraction, cfg.split_seed);
  auto both_classes = [&](const std::vector<std::size_t>& idx) {
    std::size_t f = 0;
    for (std::size_t i : idx) f += is_fault(y[i]);
    return f > 0 && f < idx.size();
  };
  if (!both_classes(split.train) || !both_classes(split.test)) {
    fail(ErrorKind::consistency, "the split leaves a single class in the training or test part; try another "
                                 "split_seed (current " + std::to_string(cfg.split_seed) + ")");
  }

  const Matrix x_train = select_rows(x, split.train), x_test = select_rows(x, split.test);
  std::vector<Label> y_train, y_test;
  for (std::size_t i : split.train) y_train.push_back(y[i]);
  for (std::size_t i : split.test) y_test.push_back(y[i]);

  const Standardizer standardizer = Standardizer::fit(x_train);
  const Matrix z_all = standardizer.apply(x);

  BenchmarkResult out;
  out.train_items = split.train.size();
  out.test_items = split.test.size();

  // Unsupervised: cluster every item, map clusters with training labels only.
  std::vector<std::optional<Label>> reference(x.rows());
  for (std::size_t i : split.train) reference[i] = y[i];
  auto eval_clustering = [&](const std::string& name, const std::vector<int>& assignments) {
    const auto mapped = clusters_to_labels(assignments, reference);
    std::vector<Label> pred;
    std::vector<double> score;
    for (std::size_t i : split.test) {
      pred.push_back(mapped[i]);
      score.push_back(is_fault(mapped[i]) ? 1.0 : 0.0);
    }
    out.rows.push_back(evaluate(name, false, y_test, pred, score));
    out.clusterings.emplace_back(name, assignments);
  };

  const Clustering km = kmeans(z_all, cfg.kmeans_k, cfg.kmeans_max_iters, cfg.kmeans_seed);
  if (km.cluster_count() >= 2) out.kmeans_silhouette = silhouette(z_all, km.assignments).mean;
  eval_clustering("kmeans", km.assignments);

  const Clustering ag = agglomerative(z_all, linkage_from_string(cfg.agglo_linkage), cfg.agglo_clusters);
  out.agglomerative_cpcc = cpcc(ag.dendrogram, pairwise_distances(z_all));
  eval_clustering("agglomerative", ag.assignments);

  Clustering op = optics_order(z_all, cfg.optics_min_samples, cfg.optics_eps);
  out.optics_extract_eps = cfg.optics_extract_eps > 0.0 ? cfg.optics_extract_eps : auto_extract_eps(op);
  op.assignments = extract_dbscan(op, z_all, out.optics_extract_eps);
  eval_clustering("optics", op.assignments);

  // Supervised.
  auto eval_model = [&](const std::string& name, Model model, const Matrix& test) {
    std::vector<Label> pred;
    std::vector<double> sc;
    for (std::size_t i = 0; i < test.rows(); ++i) {
      pred.push_back(predict(model, test.row(i)));
      sc.push_back(score(model, test.row(i)));
    }
    out.rows.push_back(evaluate(name, true, y_test, pred, sc));
    out.models.emplace_back(name, std::move(model));
  };
  eval_model("logreg", fit_logreg(x_train, y_train, {cfg.logreg_lr, cfg.logreg_iters, cfg.logreg_l2}), x_test);
  ForestParams fp;
  fp.n_trees = cfg.rforest_trees;
  fp.tree.max_depth = cfg.rforest_max_depth;
  fp.seed = cfg.rforest_seed;
  eval_model("rforest", fit_rforest(x_train, y_train, fp), x_test);
  eval_model("dtree", fit_dtree(x_train, y_train, {cfg.dtree_max_depth, cfg.dtree_min_leaf, 0}), x_test);
  eval_model("adaboost", fit_adaboost(x_train, y_train, {cfg.adaboost_rounds}), x_test);
  const Matrix z_train = standardizer.apply(x_train), z_test = standardizer.apply(x_test);
  if (cfg.knn_k > z_train.rows()) fail(ErrorKind::usage, "knn_k exceeds the number of training items");
  eval_model("knn", fit_knn(z_train, y_train, cfg.knn_k), z_test);
  return out;
}

BenchmarkResult cmd_benchmark(const RunConfig& cfg) {
  validate(cfg);
  Stopwatch sw;
  const fs::path dir = out_dir(cfg);
  const json labels = read_json(need(dir, "labels.json", "label"));
  const LabeledDataset ds =
      read_labeled_csv(need(dir, "labeled.csv", "label"), provenance_from_string(labels.at("provenance").get<std::string>()));
  BenchmarkResult res = run_benchmark(ds, cfg);
  const double t_fit = sw.lap_ms();

  std::vector<std::string> artifacts = {"eval.csv", "eval.json"};
  {
    std::ofstream ev(dir / "eval.csv", std::ios::binary);
    if (!ev) fail(ErrorKind::io, "cannot write eval.csv");
    ev << "algorithm,f1,precision,recall,accuracy,auc,tp,fp,tn,fn,degenerate\n";
    for (const auto& r : res.rows) {
      ev << r.algorithm << ',' << fixed6(r.scores.f1) << ',' << fixed6(r.scores.precision) << ','
         << fixed6(r.scores.recall) << ',' << fixed6(r.scores.accuracy) << ',' << fixed6(r.auc) << ','
         << r.confusion.tp << ',' << r.confusion.fp << ',' << r.confusion.tn << ',' << r.confusion.fn << ','
         << (r.scores.degenerate ? 1 : 0) << '\n';
    }
  }
  json rows = json::array();
  for (const auto& r : res.rows) {
    const std::string roc_name = "roc_" + r.algorithm + ".csv";
    std::string roc = "fpr,tpr\n";
    for (const auto& p : r.roc.points) roc += g9(p.fpr) + "," + g9(p.tpr) + "\n";
    write_text(dir / roc_name, roc);
    artifacts.push_back(roc_name);
    rows.push_back({{"algorithm", r.algorithm},
                    {"supervised", r.supervised},
                    {"f1", r.scores.f1},
                    {"precision", r.scores.precision},
                    {"recall", r.scores.recall},
                    {"accuracy", r.scores.accuracy},
                    {"auc", r.auc},
                    {"degenerate", r.scores.degenerate},
                    {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn},
                                   {"fn", r.confusion.fn}}}});
  }
  fs::create_directories(dir / "models");
  for (const auto& [name, model] : res.models) {
    write_json(dir / "models" / (name + ".json"), model_to_json(model));
    artifacts.push_back("models/" + name + ".json");
  }
  for (const auto& [name, assignments] : res.clusterings) {
    std::string csv = "item_id,cluster_id\n";
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      csv += std::to_string(i) + "," + (assignments[i] == kNoise ? std::string("noise") : std::to_string(assignments[i])) + "\n";
    }
    write_text(dir / ("clusters_" + name + ".csv"), csv);
    artifacts.push_back("clusters_" + name + ".csv");
  }
  write_json(dir / "eval.json", {{"schema_version", kSchemaVersion},
                                 {"positive_class", "fault"},
                                 {"label_provenance", to_string(ds.provenance)},
                                 {"label_threshold", {{"method", labels.value("threshold_method", "")},
                                                      {"q", labels.value("threshold_q", 0.0)}}},
                                 {"train_items", res.train_items},
                                 {"test_items", res.test_items},
                                 {"kmeans_silhouette", res.kmeans_silhouette},
                                 {"agglomerative_cpcc", res.agglomerative_cpcc},
                                 {"optics_extract_eps", format_real(res.optics_extract_eps)},
                                 {"rows", rows}});
  write_manifest(cfg, "benchmark", nullptr, {{"fit_and_score", t_fit}, {"write", sw.lap_ms()}}, artifacts,
                 {{"label_provenance", to_string(ds.provenance)}});
  return res;
}

// ---- report -----------------------------------------------------------------

ReportOutcome cmd_report(const fs::path& run_dir) {
  static const std::vector<std::pair<const char*, const char*>> required = {{"train", "som.json"},
                                                                            {"detect", "qe.csv"},
                                                                            {"localize", "histograms.csv"},
                                                                            {"label", "labeled.csv"},
                                                                            {"benchmark", "eval.csv"}};
  std::string missing;
  for (const auto& [stage, file] : required) {
    if (!fs::exists(run_dir / file)) missing += std::string(missing.empty() ? "" : ", ") + stage + " (" + file + ")";
  }
  if (!missing.empty()) fail(ErrorKind::consistency, "incomplete run in " + run_dir.string() + "; missing: " + missing);

  ReportOutcome out;
  const fs::path bundle = run_dir / "bundle";
  fs::create_directories(bundle);
  std::vector<fs::path> to_copy = {run_dir / "qe.csv", run_dir / "windows.csv", run_dir / "histograms.csv",
                                   run_dir / "eval.csv"};
  std::vector<fs::path> rocs;
  for (const auto& e : fs::directory_iterator(run_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("roc_", 0) == 0 && e.path().extension() == ".csv") rocs.push_back(e.path());
  }
  std::sort(rocs.begin(), rocs.end());
  to_copy.insert(to_copy.end(), rocs.begin(), rocs.end());
  for (const auto& p : to_copy) {
    if (!fs::exists(p)) continue;
    fs::copy_file(p, bundle / p.filename(), fs::copy_options::overwrite_existing);
    out.bundle.push_back(bundle / p.filename());
  }

  json report = {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}};
  json manifests = json::object();
  for (const char* stage : {"train", "detect", "localize", "label", "benchmark"}) {
    const fs::path m = run_dir / (std::string(stage) + "_manifest.json");
    if (fs::exists(m)) manifests[stage] = read_json(m);
  }
  report["manifests"] = manifests;
  for (const char* name : {"onset", "attribution", "labels", "eval"}) {
    const fs::path p = run_dir / (std::string(name) + ".json");
    if (fs::exists(p)) report[name] = read_json(p);
  }
  if (manifests.contains("benchmark")) report["config"] = manifests["benchmark"]["config"];
  out.report = run_dir / "report.json";
  write_json(out.report, report);
  return out;
}

void run_all(const RunConfig& cfg) {
  cmd_train(cfg);
  cmd_detect(cfg);
  cmd_localize(cfg);
  cmd_label(cfg);
  cmd_benchmark(cfg);
  cmd_report(cfg.out);
}

RunConfig config_from_manifest(const fs::path& manifest) {
  const json j = read_json(manifest);
  const json* cfg = nullptr;
  if (j.contains("config")) cfg = &j.at("config");
  if (!cfg) fail(ErrorKind::format, manifest.string() + " does not record a config");
  RunConfig out;
  for (const auto& [k, v] : cfg->items()) set_config_value(out, k, v.get<std::string>());
  return out;
}

}  // namespace cmon
