#include "cmon/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace cmon {

const char* to_string(Provenance p) { return p == Provenance::som_derived ? "som_derived" : "synthetic_truth"; }

Provenance provenance_from_string(std::string_view s) {
  if (s == "som_derived") return Provenance::som_derived;
  if (s == "synthetic_truth") return Provenance::synthetic_truth;
  fail(ErrorKind::format, "unknown label provenance '" + std::string(s) + "'");
}

Matrix LabeledDataset::feature_matrix() const {
  Matrix m;
  for (const auto& item : items) m.append_row(item.features.values);
  return m;
}

std::vector<Label> LabeledDataset::labels() const {
  std::vector<Label> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.label);
  return out;
}

namespace {
void check_uniform(std::span<const FeatureVector> features) {
  for (const auto& f : features) {
    require(f.values.size() == features.front().values.size(), "feature vectors differ in length");
  }
}
}  // namespace

LabeledDataset derive_labels(std::span<const bool> anomalous_windows,
                             std::span<const std::optional<std::size_t>> attributions,
                             std::span<const FeatureVector> features) {
  require(anomalous_windows.size() == attributions.size() && attributions.size() == features.size(),
          "verdicts, attributions and features must align by window");
  check_uniform(features);
  LabeledDataset ds;
  ds.provenance = Provenance::som_derived;
  ds.items.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    LabeledItem item{features[i], to_label(anomalous_windows[i]), std::nullopt};
    if (anomalous_windows[i]) {
      if (!attributions[i]) {
        fail(ErrorKind::consistency, "window " + std::to_string(i) + " is anomalous but has no bearing attribution");
      }
      item.bearing = attributions[i];
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

LabeledDataset labels_from_truth(std::span<const WindowTruth> truth, std::span<const FeatureVector> features) {
  require(truth.size() == features.size(), "truth and features must align by window");
  check_uniform(features);
  LabeledDataset ds;
  ds.provenance = Provenance::synthetic_truth;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    LabeledItem item{features[i], to_label(truth[i].anomalous), std::nullopt};
    if (truth[i].anomalous) {
      if (!truth[i].fault_channel) fail(ErrorKind::consistency, "truth row " + std::to_string(i) + " lacks a channel");
      item.bearing = truth[i].fault_channel;
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

ImbalanceReport imbalance_report(const LabeledDataset& dataset) {
  require(!dataset.items.empty(), "imbalance report of an empty dataset");
  ImbalanceReport r;
  for (const auto& item : dataset.items) {
    if (is_fault(item.label)) {
      ++r.fault;
      const std::size_t b = item.bearing.value_or(0);
      if (r.per_bearing.size() <= b) r.per_bearing.resize(b + 1, 0);
      ++r.per_bearing[b];
    } else {
      ++r.normal;
    }
  }
  const std::size_t lo = std::min(r.normal, r.fault), hi = std::max(r.normal, r.fault);
  r.single_class = lo == 0;
  r.ratio = r.single_class ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(hi) / static_cast<double>(lo);
  return r;
}

void write_labeled_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << "timestamp";
  if (!dataset.items.empty()) {
    for (const auto& name : dataset.items.front().features.names) out << ',' << name;
  }
  out << ",binary_label,bearing_label\n";
  char buf[32];
  for (const auto& item : dataset.items) {
    out << format_iso8601(item.features.window_timestamp);
    for (double v : item.features.values) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << ',' << to_string(item.label) << ',';
    if (item.bearing) out << *item.bearing;
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

LabeledDataset read_labeled_csv(const std::filesystem::path& path, Provenance provenance) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::format, path.string() + ": empty labeled dataset");
  const auto header = split(line);
  if (header.size() < 3 || header.front() != "timestamp" || header[header.size() - 2] != "binary_label" ||
      header.back() != "bearing_label") {
    fail(ErrorKind::format, path.string() + ": unexpected labeled dataset header");
  }
  const std::vector<std::string> names(header.begin() + 1, header.end() - 2);

  LabeledDataset ds;
  ds.provenance = provenance;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ParseError(line_no, "wrong number of columns");
    LabeledItem item;
    item.features.window_timestamp = parse_iso8601(cells.front());
    item.features.names = names;
    for (std::size_t k = 1; k + 2 < cells.size(); ++k) {
      double v = 0;
      const std::string& c = cells[k];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || ptr != c.data() + c.size()) throw ParseError(line_no, "bad feature '" + c + "'");
      item.features.values.push_back(v);
    }
    const std::string& lab = cells[cells.size() - 2];
    if (lab == "fault") {
      item.label = Label::fault;
    } else if (lab != "normal") {
      throw ParseError(line_no, "bad label '" + lab + "'");
    }
    const std::string& bearing = cells.back();
    if (!bearing.empty()) item.bearing = std::stoul(bearing);
    if (is_fault(item.label) != item.bearing.has_value()) {
      throw ParseError(line_no, "bearing label must be present exactly for fault rows");
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

}  // namespace cmon
