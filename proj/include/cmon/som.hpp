#pragma once

// Rectangular self-organizing map with data-sampled initialization, online
// training under exponentially decaying Gaussian neighborhoods, and
// best-matching-unit / quantization-error queries.

#include <cstddef>
#include <cstdint>
#include <span>

#include <json.hpp>

#include "cmon/matrix.hpp"
#include "cmon/qe_series.hpp"

namespace cmon {

struct TrainSchedule {
  std::size_t epochs = 30;
  double initial_radius = 0.0;  // <= 0 selects max(rows, cols) / 2
  double final_radius = 1.0;
  double initial_rate = 0.5;
  double final_rate = 0.01;
  // Units farther than cutoff * sigma(t) on the grid are skipped; 0 updates every unit.
  double neighborhood_cutoff = 0.0;

  // Radius and rate at global step `step` of `total_steps`, exponential interpolation.
  double radius_at(double initial, std::size_t step, std::size_t total_steps) const;
  double rate_at(std::size_t step, std::size_t total_steps) const;

  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

struct SomGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t dim = 0;
  Matrix weights;  // rows * cols units, unit index = r * cols + c
  std::size_t trained_epochs = 0;
  std::uint64_t seed = 0;
  std::uint64_t norm_fingerprint = 0;
  TrainSchedule schedule;  // last schedule applied by train()

  std::size_t units() const noexcept { return rows * cols; }
  std::span<const double> unit(std::size_t r, std::size_t c) const { return weights.row(r * cols + c); }

  friend bool operator==(const SomGrid&, const SomGrid&) = default;
};

struct Bmu {
  std::size_t row = 0;
  std::size_t col = 0;
  double distance = 0.0;
};

// Every unit is a copy of a training row drawn uniformly with replacement.
SomGrid init_grid(std::size_t rows, std::size_t cols, const Matrix& training_samples, std::uint64_t seed);

// Nearest unit by Euclidean distance; ties resolve to the smallest linear index.
Bmu bmu(const SomGrid& grid, std::span<const double> sample);

double quantization_error(const SomGrid& grid, std::span<const double> sample);

SomGrid train(SomGrid grid, const Matrix& samples, const TrainSchedule& schedule, std::uint64_t seed);

// One QE per row of every window, tagged with window index and timestamp.
// Every window must carry the grid's normalizer fingerprint.
QeSeries batch_qe(const SomGrid& grid, std::span<const NormalizedWindow> windows);

// Appends one window to `series` under `window_id`; used when windows are streamed.
void append_qe(QeSeries& series, const SomGrid& grid, const NormalizedWindow& window, std::size_t window_id);

nlohmann::json to_json(const TrainSchedule& s);
TrainSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SomGrid& grid);
SomGrid grid_from_json(const nlohmann::json& j);

}  // namespace cmon
