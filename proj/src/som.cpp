#include "cmon/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cmon/hash.hpp"

namespace cmon {
namespace {

void validate(const TrainSchedule& s) {
  require(s.epochs >= 1, "schedule: epochs must be >= 1");
  require(s.final_radius > 0.0, "schedule: final_radius must be > 0");
  require(s.initial_radius <= 0.0 || s.initial_radius >= s.final_radius,
          "schedule: initial_radius must be >= final_radius");
  require(s.final_rate >= 0.0 && s.initial_rate >= s.final_rate, "schedule: need initial_rate >= final_rate >= 0");
  require(s.neighborhood_cutoff >= 0.0, "schedule: neighborhood_cutoff must be >= 0");
}

double decay(double initial, double final, std::size_t step, std::size_t total_steps) {
  if (initial <= 0.0) return 0.0;
  const double frac = total_steps == 0 ? 0.0 : static_cast<double>(step) / static_cast<double>(total_steps);
  return initial * std::pow(final / initial, frac);
}

}  // namespace

double TrainSchedule::radius_at(double initial, std::size_t step, std::size_t total_steps) const {
  return decay(initial, final_radius, step, total_steps);
}

double TrainSchedule::rate_at(std::size_t step, std::size_t total_steps) const {
  return decay(initial_rate, final_rate, step, total_steps);
}

SomGrid init_grid(std::size_t rows, std::size_t cols, const Matrix& training_samples, std::uint64_t seed) {
  require(rows >= 1 && cols >= 1, "grid dimensions must be >= 1");
  require(!training_samples.empty(), "init_grid needs at least one training sample");
  SomGrid g;
  g.rows = rows;
  g.cols = cols;
  g.dim = training_samples.cols();
  g.seed = seed;
  g.weights = Matrix(rows * cols, g.dim);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, training_samples.rows() - 1);
  for (std::size_t u = 0; u < g.units(); ++u) {
    auto src = training_samples.row(pick(rng));
    std::copy(src.begin(), src.end(), g.weights.row(u).begin());
  }
  return g;
}

Bmu bmu(const SomGrid& grid, std::span<const double> sample) {
  require(sample.size() == grid.dim, "sample dimension does not match grid");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < grid.units(); ++u) {
    const double d2 = squared_distance(grid.weights.row(u), sample);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = u;
    }
  }
  return {best / grid.cols, best % grid.cols, std::sqrt(best_d2)};
}

double quantization_error(const SomGrid& grid, std::span<const double> sample) {
  return bmu(grid, sample).distance;
}

SomGrid train(SomGrid grid, const Matrix& samples, const TrainSchedule& schedule, std::uint64_t seed) {
  validate(schedule);
  require(!samples.empty(), "train needs at least one sample");
  require(samples.cols() == grid.dim, "training sample dimension does not match grid");

  const double sigma0 =
      schedule.initial_radius > 0.0
          ? schedule.initial_radius
          : std::max(schedule.final_radius, static_cast<double>(std::max(grid.rows, grid.cols)) / 2.0);
  const std::size_t n = samples.rows();
  const std::size_t total = schedule.epochs * n;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> row_gain(grid.rows), col_gain(grid.cols);

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const double alpha = schedule.rate_at(step, total);
      const double sigma = schedule.radius_at(sigma0, step, total);
      ++step;
      if (alpha == 0.0) continue;

      const auto x = samples.row(idx);
      const Bmu b = bmu(grid, x);
      // exp(-(dr^2 + dc^2) / 2s^2) factors into a row term and a column term.
      const double inv = 1.0 / (2.0 * sigma * sigma);
      for (std::size_t r = 0; r < grid.rows; ++r) {
        const double dr = static_cast<double>(r) - static_cast<double>(b.row);
        row_gain[r] = std::exp(-dr * dr * inv);
      }
      for (std::size_t c = 0; c < grid.cols; ++c) {
        const double dc = static_cast<double>(c) - static_cast<double>(b.col);
        col_gain[c] = std::exp(-dc * dc * inv);
      }
      const double cutoff2 = schedule.neighborhood_cutoff > 0.0
                                 ? std::pow(schedule.neighborhood_cutoff * sigma, 2)
                                 : std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < grid.rows; ++r) {
        const double dr = static_cast<double>(r) - static_cast<double>(b.row);
        if (dr * dr > cutoff2) continue;
        for (std::size_t c = 0; c < grid.cols; ++c) {
          const double dc = static_cast<double>(c) - static_cast<double>(b.col);
          if (dr * dr + dc * dc > cutoff2) continue;
          const double g = alpha * row_gain[r] * col_gain[c];
          auto w = grid.weights.row(r * grid.cols + c);
          for (std::size_t k = 0; k < grid.dim; ++k) w[k] += g * (x[k] - w[k]);
        }
      }
    }
  }
  grid.trained_epochs += schedule.epochs;
  grid.schedule = schedule;
  if (grid.schedule.initial_radius <= 0.0) grid.schedule.initial_radius = sigma0;
  return grid;
}

void append_qe(QeSeries& series, const SomGrid& grid, const NormalizedWindow& w, std::size_t window_id) {
  if (w.norm_fingerprint != grid.norm_fingerprint) {
    fail(ErrorKind::usage, "window " + std::to_string(window_id) + " was normalized with fingerprint " +
                               to_hex(w.norm_fingerprint) + " but the map expects " + to_hex(grid.norm_fingerprint));
  }
  require(series.windows.empty() || w.timestamp >= series.windows.back().timestamp, "windows must be in time order");
  series.windows.push_back({window_id, w.timestamp, series.qe.size(), w.values.rows()});
  for (std::size_t r = 0; r < w.values.rows(); ++r) series.qe.push_back(quantization_error(grid, w.values.row(r)));
}

QeSeries batch_qe(const SomGrid& grid, std::span<const NormalizedWindow> windows) {
  QeSeries out;
  std::size_t total = 0;
  for (const auto& w : windows) total += w.values.rows();
  out.qe.reserve(total);
  out.windows.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) append_qe(out, grid, windows[i], i);
  return out;
}

nlohmann::json to_json(const TrainSchedule& s) {
  return {{"epochs", s.epochs},
          {"initial_radius", s.initial_radius},
          {"final_radius", s.final_radius},
          {"initial_rate", s.initial_rate},
          {"final_rate", s.final_rate},
          {"neighborhood_cutoff", s.neighborhood_cutoff}};
}

TrainSchedule schedule_from_json(const nlohmann::json& j) {
  TrainSchedule s;
  s.epochs = j.at("epochs").get<std::size_t>();
  s.initial_radius = j.at("initial_radius").get<double>();
  s.final_radius = j.at("final_radius").get<double>();
  s.initial_rate = j.at("initial_rate").get<double>();
  s.final_rate = j.at("final_rate").get<double>();
  s.neighborhood_cutoff = j.at("neighborhood_cutoff").get<double>();
  return s;
}

nlohmann::json to_json(const SomGrid& g) {
  return {{"format", "cmon.som"},
          {"version", 1},
          {"rows", g.rows},
          {"cols", g.cols},
          {"dim", g.dim},
          {"trained_epochs", g.trained_epochs},
          {"seed", g.seed},
          {"norm_fingerprint", to_hex(g.norm_fingerprint)},
          {"schedule", to_json(g.schedule)},
          {"weights", g.weights.data()}};
}

SomGrid grid_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "cmon.som" || j.at("version") != 1) fail(ErrorKind::format, "not a version-1 SOM map");
    SomGrid g;
    g.rows = j.at("rows").get<std::size_t>();
    g.cols = j.at("cols").get<std::size_t>();
    g.dim = j.at("dim").get<std::size_t>();
    g.trained_epochs = j.at("trained_epochs").get<std::size_t>();
    g.seed = j.at("seed").get<std::uint64_t>();
    g.norm_fingerprint = std::stoull(j.at("norm_fingerprint").get<std::string>(), nullptr, 16);
    g.schedule = schedule_from_json(j.at("schedule"));
    auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != g.rows * g.cols * g.dim) fail(ErrorKind::format, "SOM weight count does not match shape");
    g.weights = Matrix(g.rows * g.cols, g.dim, std::move(w));
    return g;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("malformed SOM map: ") + e.what());
  }
}

}  // namespace cmon
