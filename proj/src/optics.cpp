#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cmon/clustering.hpp"

namespace cmon {

Clustering optics_order(const Matrix& data, std::size_t min_samples, double eps) {
  require(min_samples >= 2, "optics: min_samples must be >= 2");
  require(eps > 0.0, "optics: eps must be > 0");
  const std::size_t n = data.rows();
  const Matrix dist = pairwise_distances(data);

  Clustering c;
  c.kind = ClusteringKind::optics;
  c.reachability.assign(n, kUnbounded);
  c.core_distance.assign(n, kUnbounded);
  // Core distance: distance to the min_samples-th closest point, the point itself included.
  std::vector<double> row;
  for (std::size_t p = 0; p < n; ++p) {
    row.clear();
    for (std::size_t q = 0; q < n; ++q) {
      if (dist(p, q) <= eps) row.push_back(dist(p, q));
    }
    if (row.size() >= min_samples) {
      std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), row.end());
      c.core_distance[p] = row[min_samples - 1];
    }
  }

  std::vector<char> processed(n, 0);
  std::set<std::pair<double, std::size_t>> seeds;
  auto expand = [&](std::size_t p) {
    if (std::isinf(c.core_distance[p])) return;
    for (std::size_t o = 0; o < n; ++o) {
      if (processed[o] || dist(p, o) > eps) continue;
      const double r = std::max(c.core_distance[p], dist(p, o));
      if (r < c.reachability[o]) {
        if (!std::isinf(c.reachability[o])) seeds.erase({c.reachability[o], o});
        c.reachability[o] = r;
        seeds.insert({r, o});
      }
    }
  };

  c.ordering.reserve(n);
  for (std::size_t start = 0; start < n; ++start) {
    if (processed[start]) continue;
    processed[start] = 1;
    c.ordering.push_back(start);
    expand(start);
    while (!seeds.empty()) {
      const std::size_t q = seeds.begin()->second;
      seeds.erase(seeds.begin());
      processed[q] = 1;
      c.ordering.push_back(q);
      expand(q);
    }
  }
  return c;
}

std::vector<int> extract_dbscan(const Clustering& optics, const Matrix& data, double eps_prime) {
  require(eps_prime > 0.0, "optics: extraction eps must be > 0");
  require(data.rows() == optics.reachability.size(), "optics: data does not match the ordering");
  std::vector<int> out(optics.reachability.size(), kNoise);
  int cluster = -1;
  for (std::size_t p : optics.ordering) {
    const double reach = optics.reachability[p];
    if (std::isinf(reach) || reach > eps_prime) {
      if (optics.core_distance[p] <= eps_prime) {
        out[p] = ++cluster;
      }
    } else {
      out[p] = cluster;
    }
  }
  // A border point that opens a new stretch of the ordering carries the
  // reachability of the previous cluster and is read as noise above; attach it
  // to the cluster of the first core point (in ordering) within eps_prime.
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (out[p] != kNoise) continue;
    for (std::size_t q : optics.ordering) {
      if (optics.core_distance[q] <= eps_prime && out[q] != kNoise &&
          std::sqrt(squared_distance(data.row(p), data.row(q))) <= eps_prime) {
        out[p] = out[q];
        break;
      }
    }
  }
  return out;
}

Clustering optics(const Matrix& data, std::size_t min_samples, double eps, double eps_prime) {
  require(eps_prime <= eps, "optics: extraction eps must not exceed eps");
  Clustering c = optics_order(data, min_samples, eps);
  c.assignments = extract_dbscan(c, data, eps_prime);
  return c;
}

std::vector<Label> clusters_to_labels(std::span<const int> assignments,
                                      std::span<const std::optional<Label>> reference) {
  require(!assignments.empty(), "cannot map an empty clustering");
  require(assignments.size() == reference.size(), "reference labels must align with assignments");
  std::map<int, std::pair<std::size_t, std::size_t>> votes;  // cluster -> (normal, fault)
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == kNoise || !reference[i]) continue;
    auto& v = votes[assignments[i]];
    ++(is_fault(*reference[i]) ? v.second : v.first);
  }
  std::vector<Label> out(assignments.size(), Label::fault);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == kNoise) continue;
    auto it = votes.find(assignments[i]);
    if (it == votes.end()) continue;
    out[i] = to_label(it->second.second > it->second.first);
  }
  return out;
}

std::vector<Label> clusters_to_labels(std::span<const int> assignments, std::span<const Label> reference) {
  std::vector<std::optional<Label>> ref(reference.begin(), reference.end());
  return clusters_to_labels(assignments, ref);
}

}  // namespace cmon
