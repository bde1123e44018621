#pragma once

#include <cstddef>
#include <vector>

#include "cmon/matrix.hpp"

namespace cmon {

// One agglomeration step. Singletons are ids 0..n-1; the cluster created by
// merge i gets id n + i.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::size_t items = 0;
  std::vector<Merge> merges;  // exactly items - 1 entries
};

// n x n matrix of merge heights at which each pair first joins; zero diagonal.
Matrix cophenetic_distances(const Dendrogram& d);

}  // namespace cmon
