#pragma once

#include <cstddef>
#include <vector>

#include "cmon/ingest.hpp"

namespace cmon {

// Contiguous slice of a QeSeries belonging to one window.
struct QeWindow {
  std::size_t window_id = 0;
  Timestamp timestamp{};
  std::size_t offset = 0;
  std::size_t rows = 0;
};

// Per-sample quantization errors in time order. Entry i of `qe` belongs to the
// window whose [offset, offset + rows) range contains i; its row index is i - offset.
struct QeSeries {
  std::vector<QeWindow> windows;
  std::vector<double> qe;

  std::size_t size() const noexcept { return qe.size(); }
  bool empty() const noexcept { return qe.empty(); }
};

}  // namespace cmon
