#include "cmon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace cmon {

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels) {
  require(predictions.size() == labels.size(), "predictions and labels differ in length");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) m.add(is_fault(predictions[i]), is_fault(labels[i]));
  return m;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Scores prf_accuracy(const ConfusionMatrix& m) {
  require(m.total() > 0, "metrics of an empty confusion matrix");
  Scores s;
  auto ratio = [&s](std::size_t num, std::size_t den) {
    if (den == 0) {
      s.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(m.tp, m.tp + m.fp);
  s.recall = ratio(m.tp, m.tp + m.fn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = f1_score(s.precision, s.recall);
  } else {
    s.f1 = 0.0;
    s.degenerate = true;
  }
  s.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  return s;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  require(scores.size() == labels.size(), "scores and labels differ in length");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    require(std::isfinite(scores[i]), "ROC scores must be finite");
    pos += is_fault(labels[i]);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) fail(ErrorKind::degenerate, "AUC undefined: labels contain a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  // Twice the area in units of (1 negative x 1 positive), kept integral.
  std::uint64_t area2 = 0;
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    std::uint64_t dtp = 0, dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) ++(is_fault(labels[order[i]]) ? dtp : dfp);
    area2 += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
  }
  roc.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

Matrix pairwise_distances(const Matrix& data) {
  const std::size_t n = data.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::sqrt(squared_distance(data.row(i), data.row(j)));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Silhouette silhouette(const Matrix& data, std::span<const int> assignments) {
  require(assignments.size() == data.rows(), "assignments must cover every item");
  std::map<int, std::size_t> sizes;
  Silhouette out;
  for (int a : assignments) {
    if (a == kNoise) {
      ++out.noise_excluded;
    } else {
      ++sizes[a];
    }
  }
  if (sizes.size() < 2) fail(ErrorKind::usage, "silhouette needs at least two clusters");

  std::vector<int> ids;
  for (const auto& [id, n] : sizes) ids.push_back(id);
  std::map<int, std::size_t> slot;
  for (std::size_t k = 0; k < ids.size(); ++k) slot[ids[k]] = k;

  double total = 0.0;
  std::size_t counted = 0;
  std::vector<double> sums(ids.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (assignments[i] == kNoise) continue;
    ++counted;
    const std::size_t own = slot[assignments[i]];
    if (sizes[assignments[i]] == 1) continue;  // singleton contributes 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < data.rows(); ++j) {
      if (j == i || assignments[j] == kNoise) continue;
      sums[slot[assignments[j]]] += std::sqrt(squared_distance(data.row(i), data.row(j)));
    }
    const double a = sums[own] / static_cast<double>(sizes[assignments[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (k != own) b = std::min(b, sums[k] / static_cast<double>(sizes[ids[k]]));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  out.mean = total / static_cast<double>(counted);
  return out;
}

Matrix cophenetic_distances(const Dendrogram& d) {
  require(d.merges.size() + 1 == d.items, "dendrogram must hold items - 1 merges");
  std::vector<std::vector<std::size_t>> members(d.items + d.merges.size());
  for (std::size_t i = 0; i < d.items; ++i) members[i] = {i};
  Matrix coph(d.items, d.items);
  for (std::size_t m = 0; m < d.merges.size(); ++m) {
    const Merge& mg = d.merges[m];
    require(mg.left < d.items + m && mg.right < d.items + m, "merge references a cluster that does not exist yet");
    for (std::size_t a : members[mg.left]) {
      for (std::size_t b : members[mg.right]) {
        coph(a, b) = mg.height;
        coph(b, a) = mg.height;
      }
    }
    auto& dst = members[d.items + m];
    dst = std::move(members[mg.left]);
    dst.insert(dst.end(), members[mg.right].begin(), members[mg.right].end());
    members[mg.right].clear();
  }
  return coph;
}

double cpcc(const Dendrogram& dendrogram, const Matrix& original) {
  const std::size_t n = dendrogram.items;
  require(n >= 3, "CPCC needs at least 3 items");
  require(original.rows() == n && original.cols() == n, "distance matrix does not match dendrogram size");
  const Matrix coph = cophenetic_distances(dendrogram);
  double sx = 0, sy = 0;
  const double m = static_cast<double>(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sx += coph(i, j);
      sy += original(i, j);
    }
  }
  const double mx = sx / m, my = sy / m;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = coph(i, j) - mx, dy = original(i, j) - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::degenerate, "CPCC undefined: zero variance in distances");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace cmon
