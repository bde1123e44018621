#pragma once

// Anomaly localization: rank channels by their deviation from the BMU weight
// vector and count which channel dominates the anomalous samples of each window.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cmon/qe_series.hpp"
#include "cmon/som.hpp"

namespace cmon {

struct ChannelDeviation {
  std::size_t channel = 0;
  double deviation = 0.0;
};

// Descending by deviation; equal deviations keep channel order.
using DeviationRanking = std::vector<ChannelDeviation>;

// |x[c] - w[c]| against the BMU weight w of `sample`.
DeviationRanking signal_deviations(const SomGrid& grid, std::span<const double> sample);

std::vector<std::size_t> top_n(const DeviationRanking& ranking, std::size_t n);

struct OccurrenceHistogram {
  std::size_t window_id = 0;
  Timestamp timestamp{};
  std::vector<std::size_t> counts;  // per channel: anomalous samples where it ranked first
};

// One histogram per window; `flags` is aligned with the concatenated rows of `windows`.
std::vector<OccurrenceHistogram> occurrence_histogram(const SomGrid& grid, std::span<const NormalizedWindow> windows,
                                                      std::span<const std::uint8_t> flags);

// Argmax of the per-channel counts summed over histograms [first, last); ties go to the lower channel.
std::size_t attribute_fault(std::span<const OccurrenceHistogram> histograms, std::size_t first, std::size_t last);

}  // namespace cmon
