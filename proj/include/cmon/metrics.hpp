#pragma once

// Evaluation arithmetic: confusion counts, precision/recall/F1/accuracy,
// ROC/AUC, silhouette and cophenetic correlation.

#include <cstddef>
#include <span>
#include <vector>

#include "cmon/dendrogram.hpp"
#include "cmon/label.hpp"
#include "cmon/matrix.hpp"

namespace cmon {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(bool predicted_fault, bool actual_fault) {
    if (predicted_fault) {
      ++(actual_fault ? tp : fp);
    } else {
      ++(actual_fault ? fn : tn);
    }
  }
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool degenerate = false;  // some ratio was 0/0 and reported as 0
};

Scores prf_accuracy(const ConfusionMatrix& m);

// Harmonic mean 2pr / (p + r); 0 when p + r = 0.
double f1_score(double precision, double recall);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

// Threshold sweep over distinct scores, descending; tied scores form one step.
RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels);

inline constexpr int kNoise = -1;

struct Silhouette {
  double mean = 0.0;
  std::size_t noise_excluded = 0;
};

// Mean of (b - a) / max(a, b) over non-noise items. Singleton clusters score 0.
Silhouette silhouette(const Matrix& data, std::span<const int> assignments);

Matrix pairwise_distances(const Matrix& data);

// Pearson correlation between cophenetic and original distances over all pairs i < j.
double cpcc(const Dendrogram& dendrogram, const Matrix& original_distances);

}  // namespace cmon
