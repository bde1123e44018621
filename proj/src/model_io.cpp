#include <cmath>

#include "cmon/learners.hpp"

namespace cmon {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

nlohmann::json tree_json(const DecisionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, static_cast<int>(n.label), n.fault_fraction, n.samples});
  }
  return nodes;
}

DecisionTree tree_from(const nlohmann::json& j) {
  DecisionTree t;
  for (const auto& e : j) {
    TreeNode n;
    n.feature = e.at(0).get<int>();
    n.threshold = e.at(1).get<double>();
    n.left = e.at(2).get<std::uint32_t>();
    n.right = e.at(3).get<std::uint32_t>();
    n.label = static_cast<Label>(e.at(4).get<int>());
    n.fault_fraction = e.at(5).get<double>();
    n.samples = e.at(6).get<std::size_t>();
    if (n.feature >= 0 && (n.left >= j.size() || n.right >= j.size())) {
      fail(ErrorKind::format, "tree node references a missing child");
    }
    t.nodes.push_back(n);
  }
  if (t.nodes.empty()) fail(ErrorKind::format, "tree has no nodes");
  return t;
}

std::vector<int> labels_json(std::span<const Label> y) {
  std::vector<int> out;
  for (Label l : y) out.push_back(static_cast<int>(l));
  return out;
}

}  // namespace

std::string model_kind(const Model& m) {
  return std::visit(overloaded{[](const LogisticModel&) { return "logreg"; },
                               [](const DecisionTree&) { return "dtree"; },
                               [](const RandomForest&) { return "rforest"; },
                               [](const AdaBoostModel&) { return "adaboost"; },
                               [](const KnnModel&) { return "knn"; }},
                    m);
}

double score(const Model& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.score(x); }, m);
}

Label predict(const Model& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.predict(x); }, m);
}

nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j = {{"format", "cmon.model"}, {"version", 1}, {"kind", model_kind(m)}};
  std::visit(overloaded{
                 [&](const LogisticModel& lr) {
                   j["mean"] = lr.standardizer.mean;
                   j["scale"] = lr.standardizer.scale;
                   j["weights"] = lr.weights;
                   j["bias"] = lr.bias;
                   j["params"] = {{"learning_rate", lr.params.learning_rate},
                                  {"iterations", lr.params.iterations},
                                  {"l2", lr.params.l2}};
                 },
                 [&](const DecisionTree& t) { j["nodes"] = tree_json(t); },
                 [&](const RandomForest& f) {
                   j["trees"] = nlohmann::json::array();
                   for (const auto& t : f.trees) j["trees"].push_back(tree_json(t));
                 },
                 [&](const AdaBoostModel& a) {
                   j["stumps"] = nlohmann::json::array();
                   for (const Stump& s : a.stumps) j["stumps"].push_back({s.feature, s.threshold, s.polarity, s.alpha});
                 },
                 [&](const KnnModel& k) {
                   j["k"] = k.k;
                   j["rows"] = k.x.rows();
                   j["cols"] = k.x.cols();
                   j["x"] = k.x.data();
                   j["y"] = labels_json(k.y);
                 }},
             m);
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "cmon.model" || j.at("version") != 1) fail(ErrorKind::format, "not a version-1 model");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "logreg") {
      LogisticModel lr;
      lr.standardizer.mean = j.at("mean").get<std::vector<double>>();
      lr.standardizer.scale = j.at("scale").get<std::vector<double>>();
      lr.weights = j.at("weights").get<std::vector<double>>();
      lr.bias = j.at("bias").get<double>();
      const auto& p = j.at("params");
      lr.params = {p.at("learning_rate").get<double>(), p.at("iterations").get<std::size_t>(),
                   p.at("l2").get<double>()};
      return lr;
    }
    if (kind == "dtree") return tree_from(j.at("nodes"));
    if (kind == "rforest") {
      RandomForest f;
      for (const auto& t : j.at("trees")) f.trees.push_back(tree_from(t));
      return f;
    }
    if (kind == "adaboost") {
      AdaBoostModel a;
      for (const auto& s : j.at("stumps")) {
        a.stumps.push_back({s.at(0).get<std::size_t>(), s.at(1).get<double>(), s.at(2).get<int>(),
                            s.at(3).get<double>()});
      }
      return a;
    }
    if (kind == "knn") {
      KnnModel k;
      k.k = j.at("k").get<std::size_t>();
      k.x = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                   j.at("x").get<std::vector<double>>());
      for (int v : j.at("y").get<std::vector<int>>()) k.y.push_back(static_cast<Label>(v));
      return k;
    }
    fail(ErrorKind::format, "unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace cmon
