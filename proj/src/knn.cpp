#include <algorithm>
#include <numeric>

#include "cmon/learners.hpp"

namespace cmon {

KnnModel fit_knn(const Matrix& x, std::span<const Label> y, std::size_t k) {
  require(x.rows() == y.size(), "knn: features and labels must align");
  require(k >= 1, "knn: k must be >= 1");
  if (k > x.rows()) fail(ErrorKind::usage, "knn: k exceeds the number of training items");
  return KnnModel{x, std::vector<Label>(y.begin(), y.end()), k};
}

std::vector<std::size_t> KnnModel::neighbours(std::span<const double> q) const {
  require(q.size() == x.cols(), "knn: query dimension mismatch");
  std::vector<std::pair<double, std::size_t>> d(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) d[i] = {squared_distance(x.row(i), q), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

double KnnModel::score(std::span<const double> q) const {
  std::size_t faults = 0;
  for (std::size_t i : neighbours(q)) faults += is_fault(y[i]);
  return static_cast<double>(faults) / static_cast<double>(k);
}

Label KnnModel::predict(std::span<const double> q) const {
  std::size_t faults = 0;
  for (std::size_t i : neighbours(q)) faults += is_fault(y[i]);
  return to_label(2 * faults > k);
}

}  // namespace cmon
