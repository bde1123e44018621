// Acceptance suite: one PASS / FAIL / SKIP line per criterion. Exit status is
// nonzero iff some criterion fails. Tolerances are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "cmon/pipeline.hpp"
#include "oracles.hpp"

using namespace cmon;
namespace fs = std::filesystem;

namespace {

constexpr double kAucTol = 1e-12;
constexpr double kHeightTol = 1e-9;
constexpr double kCpccTol = 1e-9;
constexpr double kOracleBudgetS = 60.0;
constexpr double kEndToEndBudgetS = 300.0;
constexpr double kReportedF1Tol = 0.01;

constexpr std::size_t kOnsetLo = 120, kOnsetHi = 123;
constexpr std::size_t kInjectedChannel = 0;
constexpr double kLabelAgreement = 0.95;
constexpr double kTreeF1 = 0.95;
constexpr double kTreeAuc = 0.98;

const fs::path kSource = CMON_SOURCE_DIR;
const fs::path kWork = fs::path(CMON_WORK_DIR) / "acceptance_runs";

int failures = 0;

void report(const char* id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s  %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void skip(const char* id, const std::string& name, const std::string& why) {
  std::printf("SKIP %s  %s: %s\n", id, name.c_str(), why.c_str());
  std::fflush(stdout);
}

template <typename... A>
std::string fmt(const char* f, A... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- 1. oracle equivalence ---------------------------------------------------

std::size_t bmu_mismatches() {
  std::mt19937_64 rng(101);
  std::size_t bad = 0;
  for (int t = 0; t < 200; ++t) {
    SomGrid g;
    g.rows = 1 + rng() % 15;
    g.cols = 1 + rng() % 15;
    g.dim = 1 + rng() % 8;
    g.weights = oracle::random_matrix(g.rows * g.cols, g.dim, rng);
    Matrix x = oracle::random_matrix(1, g.dim, rng, -0.2, 1.2);
    if (t % 10 == 0 && g.units() > 1) {  // duplicated unit: exact tie between first and last
      const auto first = g.weights.row(0);
      std::copy(first.begin(), first.end(), g.weights.row(g.units() - 1).begin());
      std::copy(first.begin(), first.end(), x.row(0).begin());
    }
    const Bmu got = bmu(g, x.row(0));
    const auto want = oracle::bmu(g, x.row(0));
    bad += got.row * g.cols + got.col != want.index || got.distance != want.distance ||
           quantization_error(g, x.row(0)) != want.distance;
  }
  return bad;
}

std::size_t split_mismatches() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> coarse(0, 5);
  std::uniform_real_distribution<double> fine(-1.0, 1.0);
  std::size_t bad = 0;
  for (int t = 0; t < 200; ++t) {
    Matrix x(20, 4);
    for (double& v : x.data()) v = t % 2 ? coarse(rng) : fine(rng);
    std::vector<Label> y;
    for (int i = 0; i < 20; ++i) y.push_back(to_label(rng() % 2));
    std::vector<std::size_t> rows(20), feats{0, 1, 2, 3};
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto got = best_gini_split(x, y, rows, feats, 1);
    const auto want = oracle::best_split(x, y);
    if (got.has_value() != want.has_value()) {
      ++bad;
    } else if (got) {
      bad += got->feature != want->feature || got->threshold != want->threshold;
    }
    // the fitted tree's root is that split
    const DecisionTree tree = fit_dtree(x, y);
    if (want && tree.nodes[0].feature >= 0) {
      bad += static_cast<std::size_t>(tree.nodes[0].feature) != want->feature || tree.nodes[0].threshold != want->threshold;
    }
  }
  return bad;
}

double auc_max_delta() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 200;
    std::vector<double> s(n);
    std::vector<Label> y(n);
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 ? std::round(g(rng) * 3) : g(rng);  // half the sets carry heavy ties
      y[i] = to_label(rng() % 3 == 0);
    }
    y[0] = Label::fault;
    y[n - 1] = Label::normal;
    worst = std::max(worst, std::abs(roc_auc(s, y).auc - oracle::auc(s, y)));
  }
  return worst;
}

std::pair<std::size_t, double> linkage_mismatches() {
  std::mt19937_64 rng(404);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + t % 7;  // 2..8
    const Matrix x = oracle::random_matrix(n, 1 + rng() % 4, rng);
    const Dendrogram d = build_dendrogram(x, Linkage::average);
    const auto want = oracle::average_linkage(x);
    for (std::size_t m = 0; m < want.size(); ++m) {
      bad += d.merges[m].left != want[m].left || d.merges[m].right != want[m].right || d.merges[m].size != want[m].size;
      worst = std::max(worst, std::abs(d.merges[m].height - want[m].height));
    }
  }
  return {bad, worst};
}

double cpcc_worst_ultrametric() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Matrix x = oracle::random_matrix(3 + rng() % 20, 2, rng);
    for (Linkage l : {Linkage::average, Linkage::single, Linkage::complete}) {
      const Dendrogram d = build_dendrogram(x, l);
      worst = std::max(worst, std::abs(cpcc(d, oracle::cophenetic(d)) - 1.0));
    }
  }
  return worst;
}

std::size_t optics_mismatches() {
  const std::vector<std::vector<double>> centres{{0.0, 0.0}, {5.0, 5.0}, {0.0, 6.0}, {6.0, -1.0}};
  std::size_t bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix x = oracle::blobs(centres, 25, 0.3, 8, 8.0, seed);
    for (std::size_t ms : {3u, 5u, 8u}) {
      const Clustering o = optics_order(x, ms);
      for (double eps : {0.3, 0.5, 0.8, 1.2}) {
        bad += !oracle::dbscan_equivalent(extract_dbscan(o, x, eps), x, eps, ms);
      }
    }
  }
  return bad;
}

void criterion_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t bmu_bad = bmu_mismatches();
  const std::size_t split_bad = split_mismatches();
  const double auc_d = auc_max_delta();
  const auto [link_bad, link_d] = linkage_mismatches();
  const double cpcc_d = cpcc_worst_ultrametric();
  const std::size_t optics_bad = optics_mismatches();
  const double elapsed = seconds_since(t0);
  const bool pass = bmu_bad == 0 && split_bad == 0 && auc_d < kAucTol && link_bad == 0 && link_d <= kHeightTol &&
                    cpcc_d <= kCpccTol && optics_bad == 0 && elapsed < kOracleBudgetS;
  report("A1", "oracle equivalence", pass,
         fmt("bmu/qe mismatches %zu/200, first-split mismatches %zu/200, max |dAUC| %.3g (<%g), "
             "average-linkage id mismatches %zu, max |dh| %.3g (<=%g), max |CPCC-1| %.3g (<=%g), "
             "OPTICS extractions not DBSCAN-equivalent %zu/240, %.2fs (<%gs)",
             bmu_bad, split_bad, auc_d, kAucTol, link_bad, link_d, kHeightTol, cpcc_d, kCpccTol, optics_bad, elapsed,
             kOracleBudgetS));
}

// ---- 2. formula reproduction --------------------------------------------------

void criterion_formulas() {
  // confusion matrices with exactly p = 0.66, r = 0.58 and p = 0.99, r = 0.23
  const Scores logistic = prf_accuracy({957, 493, 1000, 693});
  const Scores kmeans_row = prf_accuracy({2277, 23, 1000, 7623});
  const double f1_logistic = std::round(logistic.f1 * 100.0) / 100.0;
  const double exact_kmeans = f1_score(0.99, 0.23);
  const bool pass = std::abs(logistic.precision - 0.66) < 1e-15 && std::abs(logistic.recall - 0.58) < 1e-15 &&
                    f1_logistic == 0.62 && std::abs(kmeans_row.f1 - exact_kmeans) < 1e-12 &&
                    std::abs(exact_kmeans - 0.373) < 0.0005 && std::abs(kmeans_row.f1 - 0.38) <= kReportedF1Tol;
  report("A2", "F1 formula reproduction", pass,
         fmt("F1(0.66, 0.58) = %.6f -> %.2f (reported 0.62); F1(0.99, 0.23) = %.6f vs reported 0.38 "
             "(|d| = %.4f <= %.2f, reported value rounded)",
             logistic.f1, f1_logistic, kmeans_row.f1, std::abs(kmeans_row.f1 - 0.38), kReportedF1Tol));
}

// ---- 3. synthetic end to end + 5. determinism -------------------------------------

std::string accuracies(const BenchmarkResult& b) {
  std::string s;
  for (const auto& r : b.rows) s += fmt("%s%s %.3f", s.empty() ? "" : ", ", r.algorithm.c_str(), r.scores.accuracy);
  return s;
}

void criterion_synthetic_and_determinism() {
  const fs::path cfg_path = kSource / "configs" / "desk_synthetic.cfg";
  RunConfig cfg = load_config(cfg_path);
  const SynthSpec spec = load_synth_spec(cfg.data);
  cfg.out = (kWork / "synthetic").string();
  fs::remove_all(cfg.out);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    cmd_train(cfg);
    const DetectOutcome d = cmd_detect(cfg);
    const LocalizeOutcome l = cmd_localize(cfg);
    const LabelOutcome lab = cmd_label(cfg);
    const BenchmarkResult b = cmd_benchmark(cfg);
    cmd_report(cfg.out);
    const double elapsed = seconds_since(t0);

    const bool spec_ok = spec.channels == 4 && spec.windows == 200 && spec.samples_per_window == 2048 &&
                         spec.onset_window == 120 && spec.fault_amplitude_growth == 5.0 * spec.noise_sigma &&
                         spec.fault_channel == kInjectedChannel;
    const bool onset_ok = d.onset_window && *d.onset_window >= kOnsetLo && *d.onset_window <= kOnsetHi;
    const bool attr_ok = l.channel && *l.channel == kInjectedChannel;
    const bool labels_ok = lab.truth_agreement && *lab.truth_agreement >= kLabelAgreement;
    bool trees_ok = true;
    double min_tree_acc = 1.0;
    for (const char* alg : {"dtree", "rforest", "adaboost"}) {
      const EvalRow& r = b.row(alg);
      trees_ok &= r.scores.f1 >= kTreeF1 && r.auc >= kTreeAuc;
      min_tree_acc = std::min(min_tree_acc, r.scores.accuracy);
    }
    bool order_ok = true;
    for (const char* alg : {"kmeans", "agglomerative", "optics"}) order_ok &= b.row(alg).scores.accuracy <= min_tree_acc;
    const bool pass = spec_ok && onset_ok && attr_ok && labels_ok && trees_ok && order_ok && elapsed < kEndToEndBudgetS;
    std::string trees;
    for (const char* alg : {"dtree", "rforest", "adaboost"}) {
      trees += fmt("%s F1 %.3f AUC %.3f; ", alg, b.row(alg).scores.f1, b.row(alg).auc);
    }
    report("A3", "synthetic end-to-end", pass,
           fmt("onset window %s (want %zu..%zu), attribution ch%s (want ch%zu), label agreement %.4f (>= %.2f), "
               "%s(>= %.2f / %.2f), accuracies [%s], unsupervised <= min tree accuracy %.3f: %s, %.1fs (<%gs)",
               d.onset_window ? std::to_string(*d.onset_window).c_str() : "none", kOnsetLo, kOnsetHi,
               l.channel ? std::to_string(*l.channel).c_str() : "-", kInjectedChannel,
               lab.truth_agreement.value_or(0.0), kLabelAgreement, trees.c_str(), kTreeF1, kTreeAuc,
               accuracies(b).c_str(), min_tree_acc, order_ok ? "yes" : "no", elapsed, kEndToEndBudgetS));
  } catch (const std::exception& e) {
    report("A3", "synthetic end-to-end", false, std::string("pipeline error: ") + e.what());
    report("A5", "determinism", false, "no run to replay");
    return;
  }

  try {
    RunConfig replay = config_from_manifest(fs::path(cfg.out) / "report.json");
    replay.out = (kWork / "synthetic_replay").string();
    fs::remove_all(replay.out);
    run_all(replay);
    std::string detail;
    bool same = true;
    for (const char* f : {"eval.csv", "som.json", "threshold.json", "qe.csv", "labeled.csv"}) {
      const bool eq = slurp(fs::path(cfg.out) / f) == slurp(fs::path(replay.out) / f) &&
                      !slurp(fs::path(cfg.out) / f).empty();
      same &= eq;
      detail += fmt("%s%s %s", detail.empty() ? "" : ", ", f, eq ? "identical" : "DIFFERS");
    }
    report("A5", "determinism", same, "replayed report.json manifest: " + detail);
  } catch (const std::exception& e) {
    report("A5", "determinism", false, std::string("replay error: ") + e.what());
  }
}

// ---- 4. IMS set 2 (optional) ----------------------------------------------------

std::vector<double> read_qe_column(const fs::path& p, std::vector<std::size_t>& window_of) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<double> qe;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string ts, wid, row, v;
    std::getline(ss, ts, ',');
    std::getline(ss, wid, ',');
    std::getline(ss, row, ',');
    std::getline(ss, v, ',');
    window_of.push_back(std::stoul(wid));
    qe.push_back(std::stod(v));
  }
  return qe;
}

void criterion_ims() {
  const char* root = std::getenv("CMON_IMS_SET2");
  const std::string name = "IMS set 2 integration (optional)";
  if (!root || !*root || !fs::is_directory(root)) {
    skip("A4", name, "dataset not available; set CMON_IMS_SET2 to the extracted 2nd_test directory");
    return;
  }
  try {
    RunConfig cfg = load_config(kSource / "configs" / "ims_set2_full.cfg");
    cfg.data = root;
    cfg.qe_csv_stride = 1;
    cfg.out = (kWork / "ims_set2").string();
    const TrainOutcome t = cmd_train(cfg);
    const DetectOutcome d = cmd_detect(cfg);
    const LocalizeOutcome l = cmd_localize(cfg);
    cmd_label(cfg);
    const BenchmarkResult b = cmd_benchmark(cfg);

    const Timestamp deadline = parse_iso8601("2004-02-18T00:00:00Z");
    const bool onset_ok = d.onset_timestamp && *d.onset_timestamp < deadline;
    const bool attr_ok = l.channel && *l.channel == 0;
    double min_tree = 1.0, max_unsup = 0.0;
    for (const char* a : {"dtree", "rforest", "adaboost"}) min_tree = std::min(min_tree, b.row(a).scores.accuracy);
    for (const char* a : {"kmeans", "agglomerative", "optics"}) max_unsup = std::max(max_unsup, b.row(a).scores.accuracy);

    // searched threshold against the derived window labels, broadcast to samples
    std::vector<std::size_t> window_of;
    const auto qe = read_qe_column(fs::path(cfg.out) / "qe.csv", window_of);
    std::vector<std::uint8_t> verdict;
    {
      std::ifstream in(fs::path(cfg.out) / "windows.csv");
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) verdict.push_back(line.ends_with("anomalous"));
    }
    std::vector<std::uint8_t> lab(qe.size());
    for (std::size_t i = 0; i < qe.size(); ++i) lab[i] = verdict[window_of[i]];
    const auto grid = default_q_grid();
    const double q = search_threshold(qe, lab, grid).best_q;

    const bool pass = t.training_samples == 1843200 && onset_ok && attr_ok && min_tree >= 0.95 && max_unsup <= 0.70 &&
                      q >= 0.15 && q <= 0.25 && std::abs(b.kmeans_silhouette - 0.369) <= 0.1 &&
                      std::abs(b.agglomerative_cpcc - 0.9333) <= 0.05;
    report("A4", name, pass,
           fmt("training samples %zu (1843200), onset %s (before 2004-02-18), attribution ch%s (ch0), "
               "min tree acc %.3f (>= 0.95), max unsupervised acc %.3f (<= 0.70), searched q %.4f (0.15..0.25), "
               "silhouette %.3f (0.369 +- 0.1), CPCC %.4f (0.9333 +- 0.05)",
               t.training_samples, d.onset_timestamp ? format_iso8601(*d.onset_timestamp).c_str() : "none",
               l.channel ? std::to_string(*l.channel).c_str() : "-", min_tree, max_unsup, q, b.kmeans_silhouette,
               b.agglomerative_cpcc));
  } catch (const std::exception& e) {
    report("A4", name, false, std::string("pipeline error: ") + e.what());
  }
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  criterion_oracles();
  criterion_formulas();
  criterion_synthetic_and_determinism();
  criterion_ims();
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
