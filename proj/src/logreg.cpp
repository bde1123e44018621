#include <algorithm>
#include <cmath>

#include "cmon/learners.hpp"

namespace cmon {
namespace {

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + exp(s)) without overflow
double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double linear(std::span<const double> theta, std::span<const double> z) {
  double s = theta.back();
  for (std::size_t k = 0; k < z.size(); ++k) s += theta[k] * z[k];
  return s;
}

void require_both_classes(std::span<const Label> y, const char* who) {
  const auto faults = std::count(y.begin(), y.end(), Label::fault);
  if (faults == 0 || static_cast<std::size_t>(faults) == y.size()) {
    fail(ErrorKind::degenerate, std::string(who) + ": training labels contain a single class");
  }
}

}  // namespace

Standardizer Standardizer::fit(const Matrix& x) {
  require(!x.empty(), "cannot standardize an empty matrix");
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean.assign(x.cols(), 0.0);
  s.scale.assign(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(r, c);
  }
  for (double& m : s.mean) m /= n;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) s.scale[c] += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / n);
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  require(row.size() == mean.size(), "feature count does not match standardizer");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / scale[c];
  return out;
}

Matrix Standardizer::apply(const Matrix& x) const {
  require(x.cols() == mean.size(), "feature count does not match standardizer");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) / scale[c];
  }
  return out;
}

double logreg_objective(std::span<const double> theta, const Matrix& z, std::span<const Label> y, double l2) {
  require(theta.size() == z.cols() + 1, "theta must hold one weight per feature plus a bias");
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const double s = linear(theta, z.row(i));
    loss += softplus(s) - (is_fault(y[i]) ? s : 0.0);
  }
  loss /= static_cast<double>(z.rows());
  double reg = 0.0;
  for (std::size_t k = 0; k + 1 < theta.size(); ++k) reg += theta[k] * theta[k];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> logreg_gradient(std::span<const double> theta, const Matrix& z, std::span<const Label> y,
                                    double l2) {
  require(theta.size() == z.cols() + 1, "theta must hold one weight per feature plus a bias");
  std::vector<double> g(theta.size(), 0.0);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto zi = z.row(i);
    const double r = sigmoid(linear(theta, zi)) - (is_fault(y[i]) ? 1.0 : 0.0);
    for (std::size_t k = 0; k < zi.size(); ++k) g[k] += r * zi[k];
    g.back() += r;
  }
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  for (double& v : g) v *= inv_n;
  for (std::size_t k = 0; k + 1 < theta.size(); ++k) g[k] += l2 * theta[k];
  return g;
}

LogisticModel fit_logreg(const Matrix& x, std::span<const Label> y, const LogRegParams& params) {
  require(x.rows() == y.size() && !x.empty(), "logreg: features and labels must align and be nonempty");
  require(params.learning_rate > 0.0 && params.l2 >= 0.0, "logreg: need learning_rate > 0 and l2 >= 0");
  require_both_classes(y, "logreg");
  LogisticModel m;
  m.params = params;
  m.standardizer = Standardizer::fit(x);
  const Matrix z = m.standardizer.apply(x);
  std::vector<double> theta(x.cols() + 1, 0.0);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    const auto g = logreg_gradient(theta, z, y, params.l2);
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= params.learning_rate * g[k];
  }
  m.bias = theta.back();
  theta.pop_back();
  m.weights = std::move(theta);
  return m;
}

double LogisticModel::score(std::span<const double> x) const {
  const auto z = standardizer.apply(x);
  double s = bias;
  for (std::size_t k = 0; k < z.size(); ++k) s += weights[k] * z[k];
  return sigmoid(s);
}

}  // namespace cmon
