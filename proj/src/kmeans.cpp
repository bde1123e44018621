#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cmon/clustering.hpp"

namespace cmon {

std::size_t Clustering::cluster_count() const {
  std::set<int> ids;
  for (int a : assignments) {
    if (a != kNoise) ids.insert(a);
  }
  return ids.size();
}

namespace {

std::size_t nearest(const Matrix& centroids, std::span<const double> x, double* d2_out) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d2 = squared_distance(centroids.row(c), x);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  if (d2_out) *d2_out = best_d2;
  return best;
}

Matrix kmeans_plus_plus(const Matrix& data, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = data.rows();
  Matrix centroids;
  std::vector<char> chosen(n, 0);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t idx = first(rng);
  centroids.append_row(data.row(idx));
  chosen[idx] = 1;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(data.row(i), data.row(idx));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centroids.rows() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      idx = n;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > target) {
          idx = i;
          break;
        }
      }
      if (idx == n) {  // rounding left the target past the last positive weight
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            idx = i;
            break;
          }
        }
      }
    } else {
      idx = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
    }
    centroids.append_row(data.row(idx));
    chosen[idx] = 1;
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(data.row(i), data.row(idx)));
  }
  return centroids;
}

}  // namespace

Clustering kmeans(const Matrix& data, std::size_t k, std::size_t max_iters, std::uint64_t seed) {
  require(k >= 1, "kmeans: k must be >= 1");
  if (k > data.rows()) fail(ErrorKind::usage, "kmeans: k exceeds the number of items");
  require(max_iters >= 1, "kmeans: max_iters must be >= 1");
  const std::size_t n = data.rows();
  std::mt19937_64 rng(seed);

  Clustering out;
  out.kind = ClusteringKind::kmeans;
  out.centroids = kmeans_plus_plus(data, k, rng);
  out.assignments.assign(n, -1);
  std::vector<double> dist2(n);

  for (std::size_t it = 0; it < max_iters; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(nearest(out.centroids, data.row(i), &dist2[i]));
      changed |= c != out.assignments[i];
      out.assignments[i] = c;
      inertia += dist2[i];
    }
    out.inertia_history.push_back(inertia);
    out.iterations = it + 1;
    if (!changed) break;

    Matrix sums(k, data.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(out.assignments[i]);
      ++counts[c];
      auto row = data.row(i);
      for (std::size_t d = 0; d < data.cols(); ++d) sums(c, d) += row[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed at the point farthest from its current centroid.
        const auto far = static_cast<std::size_t>(std::max_element(dist2.begin(), dist2.end()) - dist2.begin());
        auto src = data.row(far);
        std::copy(src.begin(), src.end(), out.centroids.row(c).begin());
        dist2[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < data.cols(); ++d) out.centroids(c, d) = sums(c, d) / static_cast<double>(counts[c]);
    }
  }
  return out;
}

}  // namespace cmon
