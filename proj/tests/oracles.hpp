#pragma once

// Deliberately naive reference implementations used to cross-check the
// library. Nothing here shares code with src/ beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cmon/clustering.hpp"
#include "cmon/label.hpp"
#include "cmon/matrix.hpp"
#include "cmon/som.hpp"

namespace oracle {

using cmon::Label;
using cmon::Matrix;

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct BmuResult {
  std::size_t index;
  double distance;
};

// Exhaustive scan in linear-index order; first minimum wins.
inline BmuResult bmu(const cmon::SomGrid& g, std::span<const double> x) {
  BmuResult best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      const double d = euclid(g.unit(r, c), x);
      if (d < best.distance) best = {r * g.cols + c, d};
    }
  }
  return best;
}

struct SplitResult {
  std::size_t feature;
  double threshold;
  // weighted child Gini impurity times n, as an exact fraction num / den
  std::int64_t num, den;
};

// Every (feature, midpoint) candidate evaluated by partitioning the rows
// directly. Strictly lower impurity wins, so enumeration order gives the
// lower-feature, lower-threshold tie rule.
inline std::optional<SplitResult> best_split(const Matrix& x, std::span<const Label> y) {
  std::optional<SplitResult> best;
  const auto n = static_cast<std::int64_t>(x.rows());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < x.rows(); ++i) vals.push_back(x(i, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      double t = (vals[k] + vals[k + 1]) / 2;
      if (!(t < vals[k + 1])) t = vals[k];
      std::int64_t cnt[2][2] = {{0, 0}, {0, 0}};  // [side][label]
      for (std::size_t i = 0; i < x.rows(); ++i) ++cnt[x(i, f) <= t ? 0 : 1][cmon::is_fault(y[i]) ? 1 : 0];
      const std::int64_t nl = cnt[0][0] + cnt[0][1], nr = cnt[1][0] + cnt[1][1];
      // nl (1 - sum pl^2) + nr (1 - sum pr^2) = n - sl / nl - sr / nr
      const std::int64_t sl = cnt[0][0] * cnt[0][0] + cnt[0][1] * cnt[0][1];
      const std::int64_t sr = cnt[1][0] * cnt[1][0] + cnt[1][1] * cnt[1][1];
      const std::int64_t den = nl * nr;
      const std::int64_t num = n * den - sl * nr - sr * nl;
      if (!best || num * best->den < best->num * den) best = SplitResult{f, t, num, den};
    }
  }
  return best;
}

// Mann-Whitney U / (P N): fraction of (fault, normal) pairs ranked correctly, ties count half.
inline double auc(std::span<const double> s, std::span<const Label> y) {
  double hits = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!cmon::is_fault(y[i])) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (cmon::is_fault(y[j])) continue;
      pairs += 1;
      if (s[i] > s[j]) hits += 1;
      else if (s[i] == s[j]) hits += 0.5;
    }
  }
  return hits / pairs;
}

// Average linkage recomputed from the raw points at every step.
inline std::vector<cmon::Merge> average_linkage(const Matrix& x) {
  const std::size_t n = x.rows();
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[i] = {i};
  std::vector<cmon::Merge> merges;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (auto ia = clusters.begin(); ia != clusters.end(); ++ia) {
      for (auto ib = std::next(ia); ib != clusters.end(); ++ib) {
        double sum = 0;
        for (std::size_t p : ia->second) {
          for (std::size_t q : ib->second) sum += euclid(x.row(p), x.row(q));
        }
        const double h = sum / static_cast<double>(ia->second.size() * ib->second.size());
        if (h < best) {  // map order visits pairs lexicographically
          best = h;
          ba = ia->first;
          bb = ib->first;
        }
      }
    }
    std::vector<std::size_t> members = clusters[ba];
    members.insert(members.end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(ba);
    clusters.erase(bb);
    merges.push_back({ba, bb, best, members.size()});
    clusters[n + step] = std::move(members);
  }
  return merges;
}

// Height at which i and j first share a cluster, by replaying merges.
inline Matrix cophenetic(const cmon::Dendrogram& d) {
  const std::size_t n = d.items;
  std::vector<std::vector<std::size_t>> members(2 * n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  Matrix out(n, n);
  for (std::size_t m = 0; m < d.merges.size(); ++m) {
    const auto& a = members[d.merges[m].left];
    const auto& b = members[d.merges[m].right];
    for (std::size_t p : a) {
      for (std::size_t q : b) out(p, q) = out(q, p) = d.merges[m].height;
    }
    members[n + m] = a;
    members[n + m].insert(members[n + m].end(), b.begin(), b.end());
  }
  return out;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Textbook DBSCAN; the eps-neighbourhood includes the point itself.
inline std::vector<int> dbscan(const Matrix& x, double eps, std::size_t min_samples, std::vector<bool>* core = nullptr) {
  const std::size_t n = x.rows();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (euclid(x.row(i), x.row(j)) <= eps) nb[i].push_back(j);
    }
  }
  std::vector<bool> is_core(n);
  for (std::size_t i = 0; i < n; ++i) is_core[i] = nb[i].size() >= min_samples;
  std::vector<int> label(n, cmon::kNoise);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_core[i] || label[i] != cmon::kNoise) continue;
    std::vector<std::size_t> queue{i};
    label[i] = next;
    while (!queue.empty()) {
      const std::size_t p = queue.back();
      queue.pop_back();
      if (!is_core[p]) continue;
      for (std::size_t q : nb[p]) {
        if (label[q] == cmon::kNoise) {
          label[q] = next;
          queue.push_back(q);
        }
      }
    }
    ++next;
  }
  if (core) *core = is_core;
  return label;
}

// True when a and b describe the same partition (noise must coincide exactly).
inline bool same_partition(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == cmon::kNoise) != (b[i] == cmon::kNoise)) return false;
    if (a[i] == cmon::kNoise) continue;
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

// DBSCAN clusterings are unique up to border points that touch several
// clusters. `labels` is equivalent to the textbook result when core points are
// partitioned identically, noise coincides, and every border point sits in
// the cluster of one of its core neighbours.
inline bool dbscan_equivalent(std::span<const int> labels, const Matrix& x, double eps, std::size_t min_samples) {
  std::vector<bool> core;
  const std::vector<int> ref = dbscan(x, eps, min_samples, &core);
  std::vector<int> a, b;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (core[i]) {
      a.push_back(labels[i]);
      b.push_back(ref[i]);
    }
  }
  if (!same_partition(a, b)) return false;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if ((labels[i] == cmon::kNoise) != (ref[i] == cmon::kNoise)) return false;
    if (core[i] || labels[i] == cmon::kNoise) continue;
    bool joined_a_neighbour = false;
    for (std::size_t j = 0; j < ref.size() && !joined_a_neighbour; ++j) {
      joined_a_neighbour = core[j] && labels[j] == labels[i] && euclid(x.row(i), x.row(j)) <= eps;
    }
    if (!joined_a_neighbour) return false;
  }
  return true;
}

// Gaussian blobs around the given centres plus uniform outliers in [-box, box]^dim.
inline Matrix blobs(const std::vector<std::vector<double>>& centres, std::size_t per_blob, double spread,
                    std::size_t outliers, double box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  std::uniform_real_distribution<double> u(-box, box);
  Matrix m;
  for (const auto& c : centres) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::vector<double> p(c);
      for (double& v : p) v += g(rng);
      m.append_row(p);
    }
  }
  for (std::size_t i = 0; i < outliers; ++i) {
    std::vector<double> p(centres.front().size());
    for (double& v : p) v = u(rng);
    m.append_row(p);
  }
  return m;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = 0.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

}  // namespace oracle
