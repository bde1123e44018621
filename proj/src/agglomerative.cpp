#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmon/clustering.hpp"

namespace cmon {

Linkage linkage_from_string(std::string_view s) {
  if (s == "average") return Linkage::average;
  if (s == "single") return Linkage::single;
  if (s == "complete") return Linkage::complete;
  fail(ErrorKind::usage, "unknown linkage '" + std::string(s) + "'");
}

Dendrogram build_dendrogram(const Matrix& data, Linkage linkage) {
  const std::size_t n = data.rows();
  if (n < 2) fail(ErrorKind::usage, "agglomerative clustering needs at least 2 items");
  Matrix dist = pairwise_distances(data);

  // slot i holds cluster ids[i] of sizes[i] items; merged clusters reuse the lower slot
  std::vector<std::size_t> ids(n), sizes(n, 1);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), std::size_t{0});

  Dendrogram d;
  d.items = n;
  d.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{0, 0};
    bool found = false;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const std::size_t i = active[a], j = active[b];
        const double h = dist(i, j);
        const std::pair<std::size_t, std::size_t> key{std::min(ids[i], ids[j]), std::max(ids[i], ids[j])};
        if (!found || h < best || (h == best && key < best_key)) {
          found = true;
          best = h;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    }
    const std::size_t ni = sizes[bi], nj = sizes[bj];
    d.merges.push_back({best_key.first, best_key.second, best, ni + nj});

    for (std::size_t k : active) {
      if (k == bi || k == bj) continue;
      double v = 0.0;
      switch (linkage) {
        case Linkage::single: v = std::min(dist(k, bi), dist(k, bj)); break;
        case Linkage::complete: v = std::max(dist(k, bi), dist(k, bj)); break;
        case Linkage::average:
          v = (static_cast<double>(ni) * dist(k, bi) + static_cast<double>(nj) * dist(k, bj)) /
              static_cast<double>(ni + nj);
          break;
      }
      dist(k, bi) = v;
      dist(bi, k) = v;
    }
    ids[bi] = n + step;
    sizes[bi] = ni + nj;
    active.erase(std::find(active.begin(), active.end(), bj));
  }
  return d;
}

std::vector<int> cut_dendrogram(const Dendrogram& d, std::size_t k) {
  const std::size_t n = d.items;
  require(k >= 1 && k <= n, "cut: cluster count must lie in [1, items]");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // representative item of every cluster id
  std::vector<std::size_t> rep(n + d.merges.size());
  std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), std::size_t{0});
  for (std::size_t m = 0; m + k < n; ++m) {
    const std::size_t a = find(rep[d.merges[m].left]), b = find(rep[d.merges[m].right]);
    parent[std::max(a, b)] = std::min(a, b);
    rep[n + m] = std::min(a, b);
  }
  std::vector<int> out(n, -1);
  std::vector<int> label_of(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (label_of[r] < 0) label_of[r] = next++;
    out[i] = label_of[r];
  }
  return out;
}

Clustering agglomerative(const Matrix& data, Linkage linkage, std::size_t n_clusters) {
  Clustering c;
  c.kind = ClusteringKind::agglomerative;
  c.dendrogram = build_dendrogram(data, linkage);
  c.assignments = cut_dendrogram(c.dendrogram, n_clusters);
  return c;
}

}  // namespace cmon
