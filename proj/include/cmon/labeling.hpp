#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cmon/ingest.hpp"
#include "cmon/label.hpp"

namespace cmon {

enum class Provenance { som_derived, synthetic_truth };

const char* to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct LabeledItem {
  FeatureVector features;
  Label label = Label::normal;
  std::optional<std::size_t> bearing;  // present iff label == fault
};

struct LabeledDataset {
  std::vector<LabeledItem> items;
  Provenance provenance = Provenance::som_derived;

  Matrix feature_matrix() const;
  std::vector<Label> labels() const;
};

// Binary label from the window verdict, bearing from the window's attribution.
// A fault window without an attribution is a consistency error.
LabeledDataset derive_labels(std::span<const bool> anomalous_windows,
                             std::span<const std::optional<std::size_t>> attributions,
                             std::span<const FeatureVector> features);

LabeledDataset labels_from_truth(std::span<const WindowTruth> truth, std::span<const FeatureVector> features);

struct ImbalanceReport {
  std::size_t normal = 0;
  std::size_t fault = 0;
  std::vector<std::size_t> per_bearing;
  // majority / minority; infinite when one class is absent
  double ratio = 0.0;
  bool single_class = false;
};

ImbalanceReport imbalance_report(const LabeledDataset& dataset);

void write_labeled_csv(const LabeledDataset& dataset, const std::filesystem::path& path);
// Provenance is not part of the CSV; the caller supplies it from the run manifest.
LabeledDataset read_labeled_csv(const std::filesystem::path& path, Provenance provenance);

}  // namespace cmon
