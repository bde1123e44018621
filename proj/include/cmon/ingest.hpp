#pragma once

// Vibration data ingestion: IMS-format text files, min-max normalization,
// per-window summary features, a synthetic fault generator and seeded splits.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmon/matrix.hpp"

namespace cmon {

using Timestamp = std::chrono::sys_seconds;

inline constexpr double kImsSampleRateHz = 20000.0;

// One ingested file: rows are time-ordered samples, columns are channels.
struct Window {
  Timestamp timestamp{};
  Matrix samples;
  double sample_rate_hz = kImsSampleRateHz;
  std::string source_id;

  std::size_t rows() const noexcept { return samples.rows(); }
  std::size_t channels() const noexcept { return samples.cols(); }
};

// Parses the body of an IMS file. Blank lines are skipped; line numbers in
// errors refer to physical lines (1-based).
Window parse_ims_file(std::string_view text, std::size_t expected_channels);

// Reads `path`, parses it and stamps the window with the timestamp encoded in the filename.
Window read_ims_file(const std::filesystem::path& path, std::size_t expected_channels);

// Shortest round-trip representation, tab-separated, one sample per line.
std::string format_ims(const Window& window);

// "YYYY.MM.DD.hh.mm.ss" -> UTC time point.
Timestamp parse_ims_timestamp(std::string_view filename);
std::string format_ims_timestamp(Timestamp t);
std::string format_iso8601(Timestamp t);
Timestamp parse_iso8601(std::string_view text);  // "YYYY-MM-DDThh:mm:ssZ"

// Files in `dir` whose names follow the dotted timestamp pattern, sorted by name.
std::vector<std::filesystem::path> list_ims_files(const std::filesystem::path& dir);

struct NormParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t channels() const noexcept { return min.size(); }
  // Binds downstream artifacts (maps, normalized windows) to these exact parameters.
  std::uint64_t fingerprint() const;
};

NormParams fit_normalizer(std::span<const Window> windows);

// (x - min) / (max - min) per channel, 0.5 on degenerate channels. No clipping.
std::vector<double> normalize(const NormParams& params, std::span<const double> sample);

// A window mapped through a normalizer; carries the normalizer fingerprint.
struct NormalizedWindow {
  Timestamp timestamp{};
  Matrix values;
  std::uint64_t norm_fingerprint = 0;
};

NormalizedWindow normalize_window(const NormParams& params, const Window& window);

inline constexpr std::size_t kFeaturesPerChannel = 5;

struct FeatureVector {
  Timestamp window_timestamp{};
  std::vector<double> values;
  std::vector<std::string> names;
  // Names of features that were undefined and reported as 0 (e.g. "ch2.kurtosis").
  std::vector<std::string> degenerate;
};

// Per channel: mean |x|, RMS, kurtosis (population moments), crest factor, peak |x|.
FeatureVector extract_features(const Window& window);
std::vector<std::string> feature_names(std::size_t channels);

struct SynthSpec {
  std::size_t channels = 4;
  std::size_t windows = 200;
  std::size_t samples_per_window = 2048;
  std::size_t fault_channel = 0;
  std::size_t onset_window = 120;  // == windows: no fault at all
  // Impulse amplitude is growth * (w - onset + 1) for window w >= onset.
  double fault_amplitude_growth = 5.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 7;
  std::size_t impulse_period = 32;
  std::size_t impulse_width = 8;
  double sample_rate_hz = kImsSampleRateHz;
};

void validate(const SynthSpec& spec);

struct WindowTruth {
  bool anomalous = false;
  std::optional<std::size_t> fault_channel;

  friend bool operator==(const WindowTruth&, const WindowTruth&) = default;
};

struct SyntheticDataset {
  std::vector<Window> windows;
  std::vector<WindowTruth> truth;
};

// Gaussian noise on every channel; from the onset window on, the fault channel
// carries a periodic train of half-sine bursts whose amplitude grows linearly.
SyntheticDataset generate_synthetic(const SynthSpec& spec);

// Writes each window as an IMS file plus truth.csv (window_index,label,fault_channel).
void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir);
std::vector<WindowTruth> read_truth_csv(const std::filesystem::path& path);
void write_truth_csv(std::span<const WindowTruth> truth, const std::filesystem::path& path);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1; |train| = round(train_fraction * n).
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(std::span<const T> items, double train_fraction,
                                                        std::uint64_t seed) {
  const SplitIndices idx = split_indices(items.size(), train_fraction, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(idx.train.size());
  out.second.reserve(idx.test.size());
  for (std::size_t i : idx.train) out.first.push_back(items[i]);
  for (std::size_t i : idx.test) out.second.push_back(items[i]);
  return out;
}

}  // namespace cmon
