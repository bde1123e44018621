#pragma once

// Quantization-error thresholding: quantile estimation, fixed-quantile and
// F1-searched thresholds, per-sample flags and per-window verdicts.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "cmon/qe_series.hpp"

namespace cmon {

enum class ThresholdMethod { fixed_quantile, searched };

struct Threshold {
  double tau = 0.0;
  double quantile_q = 0.0;
  ThresholdMethod method = ThresholdMethod::fixed_quantile;
  std::size_t training_qe_count = 0;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

// Linear interpolation between order statistics: h = q (n - 1),
// v[floor h] + (h - floor h) (v[floor h + 1] - v[floor h]).
double quantile(std::span<const double> values, double q);

// Same rule on data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);

Threshold fit_threshold_fixed(std::span<const double> training_qes, double q);

struct ThresholdSearch {
  double best_q = 0.0;
  Threshold threshold;
  double best_score = 0.0;
  std::vector<std::pair<double, double>> curve;  // (q, F1) per grid point
};

// {0.0001, 0.001, 0.01, 0.02, ..., 0.99} plus 0.1782, ascending.
std::vector<double> default_q_grid();

// Scores tau_q = quantile(qes, q) by F1 of (qe > tau_q) against `anomalous`;
// the highest score wins, ties go to the smallest q.
ThresholdSearch search_threshold(std::span<const double> qes, std::span<const std::uint8_t> anomalous,
                                 std::span<const double> q_grid);

// 1 where qe > tau. A QE equal to tau is normal.
std::vector<std::uint8_t> classify(std::span<const double> qes, const Threshold& threshold);

bool window_verdict(std::span<const std::uint8_t> window_flags, double min_fraction);

struct WindowVerdict {
  std::size_t window_id = 0;
  Timestamp timestamp{};
  std::size_t rows = 0;
  std::size_t flagged = 0;
  bool anomalous = false;

  double fraction() const { return rows ? static_cast<double>(flagged) / static_cast<double>(rows) : 0.0; }
};

std::vector<WindowVerdict> window_verdicts(const QeSeries& series, std::span<const std::uint8_t> flags,
                                           double min_fraction);

// Index into `verdicts` of the first window that starts a run of `run_length`
// consecutive anomalous windows.
std::optional<std::size_t> find_onset(std::span<const WindowVerdict> verdicts, std::size_t run_length);

const char* to_string(ThresholdMethod m);
ThresholdMethod threshold_method_from_string(std::string_view s);
nlohmann::json to_json(const Threshold& t);
Threshold threshold_from_json(const nlohmann::json& j);

}  // namespace cmon
