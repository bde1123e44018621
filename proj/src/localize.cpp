#include "cmon/localize.hpp"

#include <algorithm>
#include <cmath>

namespace cmon {

DeviationRanking signal_deviations(const SomGrid& grid, std::span<const double> sample) {
  const Bmu b = bmu(grid, sample);
  const auto w = grid.unit(b.row, b.col);
  DeviationRanking ranking(sample.size());
  for (std::size_t c = 0; c < sample.size(); ++c) ranking[c] = {c, std::abs(sample[c] - w[c])};
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const ChannelDeviation& a, const ChannelDeviation& b) { return a.deviation > b.deviation; });
  return ranking;
}

std::vector<std::size_t> top_n(const DeviationRanking& ranking, std::size_t n) {
  require(n >= 1 && n <= ranking.size(), "top_n: n must lie in [1, channels]");
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = ranking[i].channel;
  return out;
}

std::vector<OccurrenceHistogram> occurrence_histogram(const SomGrid& grid, std::span<const NormalizedWindow> windows,
                                                      std::span<const std::uint8_t> flags) {
  std::size_t total = 0;
  for (const auto& w : windows) total += w.values.rows();
  require(flags.size() == total, "flags are not aligned with window rows");

  std::vector<OccurrenceHistogram> out;
  out.reserve(windows.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const NormalizedWindow& w = windows[i];
    OccurrenceHistogram h{i, w.timestamp, std::vector<std::size_t>(grid.dim, 0)};
    for (std::size_t r = 0; r < w.values.rows(); ++r) {
      if (flags[offset + r]) ++h.counts[signal_deviations(grid, w.values.row(r)).front().channel];
    }
    offset += w.values.rows();
    out.push_back(std::move(h));
  }
  return out;
}

std::size_t attribute_fault(std::span<const OccurrenceHistogram> histograms, std::size_t first, std::size_t last) {
  require(first < last && last <= histograms.size(), "attribution range is empty or out of bounds");
  std::vector<std::size_t> sums(histograms[first].counts.size(), 0);
  for (std::size_t i = first; i < last; ++i) {
    require(histograms[i].counts.size() == sums.size(), "histograms disagree on channel count");
    for (std::size_t c = 0; c < sums.size(); ++c) sums[c] += histograms[i].counts[c];
  }
  const auto it = std::max_element(sums.begin(), sums.end());  // first maximum = lowest channel
  if (it == sums.end() || *it == 0) fail(ErrorKind::no_anomaly, "no anomalous samples in the attribution range");
  return static_cast<std::size_t>(it - sums.begin());
}

}  // namespace cmon
