#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmon/learners.hpp"

namespace cmon {

std::optional<Stump> best_stump(const Matrix& x, std::span<const Label> y, std::span<const double> weights,
                                double* weighted_error) {
  const std::size_t n = x.rows();
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double fault_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) fault_total += is_fault(y[i]) ? weights[i] : 0.0;

  std::optional<Stump> best;
  double best_err = 0.0;
  std::vector<std::size_t> order(n);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    // Polarity +1 predicts fault above the threshold: errors are faults at or
    // below it plus normals above it.
    double fault_below = 0.0, normal_below = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      (is_fault(y[order[i]]) ? fault_below : normal_below) += weights[order[i]];
      const double v = x(order[i], f), next = x(order[i + 1], f);
      if (!(v < next)) continue;
      const double normal_above = (total - fault_total) - normal_below;
      const double err_pos = fault_below + normal_above;
      const double err_neg = total - err_pos;
      double m = 0.5 * (v + next);
      if (!(m < next)) m = v;
      for (int polarity : {1, -1}) {
        const double err = polarity == 1 ? err_pos : err_neg;
        if (!best || err < best_err) {
          best = Stump{f, m, polarity, 0.0};
          best_err = err;
        }
      }
    }
  }
  if (best && weighted_error) *weighted_error = best_err / total;
  return best;
}

AdaBoostModel fit_adaboost(const Matrix& x, std::span<const Label> y, const AdaBoostParams& params) {
  require(x.rows() == y.size() && !x.empty(), "adaboost: features and labels must align and be nonempty");
  const auto faults = static_cast<std::size_t>(std::count(y.begin(), y.end(), Label::fault));
  if (faults == 0 || faults == y.size()) fail(ErrorKind::degenerate, "adaboost: training labels contain a single class");

  const std::size_t n = x.rows();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> ensemble(n, 0.0);  // F(x_i)
  AdaBoostModel model;
  for (std::size_t m = 0; m < params.rounds; ++m) {
    double eps = 0.0;
    auto stump = best_stump(x, y, w, &eps);
    if (!stump || eps >= 0.5) break;
    if (eps <= 0.0) {
      // A perfect stump is the whole model.
      stump->alpha = 1.0;
      model.stumps.assign(1, *stump);
      model.history.assign(1, BoostRound{0.0, 1.0, 0.0, std::exp(-1.0), w});
      break;
    }
    stump->alpha = 0.5 * std::log((1.0 - eps) / eps);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int yi = is_fault(y[i]) ? 1 : -1;
      const int h = stump->vote(x.row(i));
      w[i] *= std::exp(-stump->alpha * yi * h);
      norm += w[i];
      ensemble[i] += stump->alpha * h;
    }
    for (double& wi : w) wi /= norm;
    model.stumps.push_back(*stump);

    BoostRound round{eps, stump->alpha, 0.0, 0.0, w};
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int yi = is_fault(y[i]) ? 1 : -1;
      wrong += (ensemble[i] > 0.0 ? 1 : -1) != yi;
      round.exp_loss += std::exp(-yi * ensemble[i]);
    }
    round.training_error = static_cast<double>(wrong) / static_cast<double>(n);
    round.exp_loss /= static_cast<double>(n);
    model.history.push_back(round);
  }
  return model;
}

double AdaBoostModel::score(std::span<const double> x) const {
  double s = 0.0;
  for (const Stump& st : stumps) s += st.alpha * st.vote(x);
  return s;
}

}  // namespace cmon
