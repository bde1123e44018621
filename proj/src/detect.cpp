#include "cmon/detect.hpp"

#include <algorithm>
#include <cmath>

#include "cmon/metrics.hpp"

namespace cmon {

double quantile_sorted(std::span<const double> v, double q) {
  require(!v.empty(), "quantile of an empty list");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v[lo];
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double quantile(std::span<const double> values, double q) {
  require(!values.empty(), "quantile of an empty list");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

Threshold fit_threshold_fixed(std::span<const double> training_qes, double q) {
  return {quantile(training_qes, q), q, ThresholdMethod::fixed_quantile, training_qes.size()};
}

std::vector<double> default_q_grid() {
  std::vector<double> grid = {0.0001, 0.001};
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  grid.push_back(0.1782);
  std::sort(grid.begin(), grid.end());
  return grid;
}

ThresholdSearch search_threshold(std::span<const double> qes, std::span<const std::uint8_t> anomalous,
                                 std::span<const double> q_grid) {
  require(qes.size() == anomalous.size(), "labels must align with quantization errors");
  require(!qes.empty(), "threshold search needs at least one QE");
  require(!q_grid.empty(), "threshold search needs a nonempty q grid");
  require(std::is_sorted(q_grid.begin(), q_grid.end()), "q grid must be ascending");
  const auto positives = static_cast<std::size_t>(std::count(anomalous.begin(), anomalous.end(), 1));
  if (positives == 0) fail(ErrorKind::degenerate, "F1 undefined: every label is 'normal'");
  if (positives == anomalous.size()) fail(ErrorKind::degenerate, "F1 undefined: every label is 'anomalous'");

  std::vector<double> sorted(qes.begin(), qes.end());
  std::sort(sorted.begin(), sorted.end());

  ThresholdSearch out;
  bool have = false;
  for (double q : q_grid) {
    const double tau = quantile_sorted(sorted, q);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < qes.size(); ++i) cm.add(qes[i] > tau, anomalous[i] != 0);
    const double f1 = prf_accuracy(cm).f1;
    out.curve.emplace_back(q, f1);
    if (!have || f1 > out.best_score) {
      have = true;
      out.best_score = f1;
      out.best_q = q;
      out.threshold = {tau, q, ThresholdMethod::searched, qes.size()};
    }
  }
  return out;
}

std::vector<std::uint8_t> classify(std::span<const double> qes, const Threshold& threshold) {
  std::vector<std::uint8_t> flags(qes.size());
  for (std::size_t i = 0; i < qes.size(); ++i) flags[i] = qes[i] > threshold.tau ? 1 : 0;
  return flags;
}

bool window_verdict(std::span<const std::uint8_t> window_flags, double min_fraction) {
  require(!window_flags.empty(), "window verdict of an empty window");
  require(min_fraction > 0.0 && min_fraction <= 1.0, "min_fraction must lie in (0, 1]");
  const auto flagged = static_cast<std::size_t>(std::count(window_flags.begin(), window_flags.end(), 1));
  // flagged / rows >= min_fraction, evaluated without dividing
  return static_cast<double>(flagged) >= min_fraction * static_cast<double>(window_flags.size());
}

std::vector<WindowVerdict> window_verdicts(const QeSeries& series, std::span<const std::uint8_t> flags,
                                           double min_fraction) {
  require(flags.size() == series.size(), "flags must align with the QE series");
  std::vector<WindowVerdict> out;
  out.reserve(series.windows.size());
  for (const QeWindow& w : series.windows) {
    auto slice = flags.subspan(w.offset, w.rows);
    WindowVerdict v;
    v.window_id = w.window_id;
    v.timestamp = w.timestamp;
    v.rows = w.rows;
    v.flagged = static_cast<std::size_t>(std::count(slice.begin(), slice.end(), 1));
    v.anomalous = window_verdict(slice, min_fraction);
    out.push_back(v);
  }
  return out;
}

std::optional<std::size_t> find_onset(std::span<const WindowVerdict> verdicts, std::size_t run_length) {
  require(run_length >= 1, "onset run length must be >= 1");
  std::size_t run = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    run = verdicts[i].anomalous ? run + 1 : 0;
    if (run == run_length) return i + 1 - run_length;
  }
  return std::nullopt;
}

const char* to_string(ThresholdMethod m) {
  return m == ThresholdMethod::fixed_quantile ? "fixed_quantile" : "searched";
}

ThresholdMethod threshold_method_from_string(std::string_view s) {
  if (s == "fixed_quantile" || s == "fixed") return ThresholdMethod::fixed_quantile;
  if (s == "searched") return ThresholdMethod::searched;
  fail(ErrorKind::usage, "unknown threshold method '" + std::string(s) + "'");
}

nlohmann::json to_json(const Threshold& t) {
  return {{"format", "cmon.threshold"},
          {"version", 1},
          {"tau", t.tau},
          {"q", t.quantile_q},
          {"method", to_string(t.method)},
          {"count", t.training_qe_count}};
}

Threshold threshold_from_json(const nlohmann::json& j) {
  try {
    Threshold t;
    t.tau = j.at("tau").get<double>();
    t.quantile_q = j.at("q").get<double>();
    t.method = threshold_method_from_string(j.at("method").get<std::string>());
    t.training_qe_count = j.at("count").get<std::size_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("malformed threshold: ") + e.what());
  }
}

}  // namespace cmon
