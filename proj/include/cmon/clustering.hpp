#pragma once

// Unsupervised learners: k-means (k-means++ seeding), agglomerative clustering
// with Lance-Williams updates, and OPTICS with DBSCAN-style flat extraction.
// Flat assignments use kNoise (-1) for points that belong to no cluster.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cmon/dendrogram.hpp"
#include "cmon/label.hpp"
#include "cmon/matrix.hpp"
#include "cmon/metrics.hpp"

namespace cmon {

enum class ClusteringKind { kmeans, agglomerative, optics };

struct Clustering {
  ClusteringKind kind = ClusteringKind::kmeans;
  std::vector<int> assignments;

  // k-means
  Matrix centroids;
  std::vector<double> inertia_history;  // after every assignment step
  std::size_t iterations = 0;

  // agglomerative
  Dendrogram dendrogram;

  // OPTICS: visiting order, and per-point reachability / core distance
  // (infinity marks "undefined").
  std::vector<std::size_t> ordering;
  std::vector<double> reachability;
  std::vector<double> core_distance;

  std::size_t cluster_count() const;
};

Clustering kmeans(const Matrix& data, std::size_t k, std::size_t max_iters, std::uint64_t seed);

enum class Linkage { average, single, complete };
Linkage linkage_from_string(std::string_view s);

Dendrogram build_dendrogram(const Matrix& data, Linkage linkage);

// Flat clusters after undoing the last k - 1 merges; ids follow the smallest member index.
std::vector<int> cut_dendrogram(const Dendrogram& d, std::size_t k);

Clustering agglomerative(const Matrix& data, Linkage linkage, std::size_t n_clusters);

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Ordering and reachability only; assignments left empty.
Clustering optics_order(const Matrix& data, std::size_t min_samples, double eps = kUnbounded);

// DBSCAN-equivalent flat clusters at eps_prime <= eps from an OPTICS ordering
// of `data`. Border points reachable from two clusters join the one whose core
// point comes first in the ordering.
std::vector<int> extract_dbscan(const Clustering& optics, const Matrix& data, double eps_prime);

Clustering optics(const Matrix& data, std::size_t min_samples, double eps, double eps_prime);

// Each cluster takes the majority reference label of its labelled members
// (tie -> normal); noise and clusters without labelled members map to fault.
std::vector<Label> clusters_to_labels(std::span<const int> assignments,
                                      std::span<const std::optional<Label>> reference);
std::vector<Label> clusters_to_labels(std::span<const int> assignments, std::span<const Label> reference);

}  // namespace cmon
