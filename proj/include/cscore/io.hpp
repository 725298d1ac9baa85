#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cscore/cam.hpp"
#include "cscore/engine.hpp"
#include "cscore/trajectory.hpp"

namespace cscore {

namespace fs = std::filesystem;

inline constexpr int kManifestVersion = 1;

// ---------------------------------------------------------------------------
// Raw tensor files: little-endian float32, no header; the shape lives in the
// manifest.

std::vector<float> read_tensor_file(const fs::path& path, std::size_t expected_count);
void write_tensor_file(const fs::path& path, std::span<const float> values);

// ---------------------------------------------------------------------------
// Bundle manifest

struct LayerRef {
  std::array<std::size_t, 3> shape{};  // height, width, channels
  fs::path activations;
  std::optional<fs::path> gradients;
  std::optional<fs::path> channel_scores;
};

struct ImageEntry {
  std::string image_id;
  int true_label = 0;
  std::vector<double> confidences;  // one per class
  std::map<std::string, LayerRef> layers;
  std::vector<int> scorecam_channels;  // channels the exporter scored, if recorded
};

struct BundleManifest {
  int version = kManifestVersion;
  std::string architecture;
  std::string checkpoint_id;
  std::vector<std::string> classes;
  std::vector<std::string> target_layers;
  std::optional<std::array<std::size_t, 2>> input_size;
  std::string head;               // "sigmoid" / "softmax"; informational
  std::string scorecam_baseline;  // informational
  std::vector<ImageEntry> images;
  fs::path base_dir;  // tensor paths are resolved against this

  std::optional<std::size_t> find_image(std::string_view image_id) const;

  // Loads one image/layer bundle from disk. Gradients are taken with respect
  // to the image's true label.
  ActivationBundle load_bundle(std::size_t image_index, const std::string& layer_id) const;
};

/// Parses and validates a manifest. Every referenced tensor file must exist
/// with the byte size implied by its declared shape; tensor contents are read
/// lazily by load_bundle.
BundleManifest read_manifest(const fs::path& path);

/// Writes the manifest JSON to `path`. Tensor references are written relative
/// to the manifest's directory when they live beneath it.
void write_manifest(const BundleManifest& manifest, const fs::path& path);

// ---------------------------------------------------------------------------
// epoch_metrics.csv: header epoch,phase,auc,accuracy (fractions, not percent)

struct EpochMetrics {
  int epoch = 0;
  Phase phase = Phase::TL;
  double auc = 0.0;
  double accuracy = 0.0;
};

std::vector<EpochMetrics> read_epoch_metrics(const fs::path& path);
void write_epoch_metrics(std::span<const EpochMetrics> rows, const fs::path& path);

// ---------------------------------------------------------------------------
// Score report CSV: checkpoint,method,class,cscore,cscore_full,gold_size,flags
// `class` is an integer class id or "global"; flags are ';'-separated.

struct ScoreRow {
  std::string checkpoint;
  CamMethod method = CamMethod::GradCAM;
  std::optional<int> class_id;  // nullopt: support-weighted global row
  double cscore = 0.0;
  std::size_t gold_size = 0;
  std::vector<std::string> flags;

  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

std::vector<ScoreRow> rows_from_result(const std::string& checkpoint,
                                       const GlobalConsistencyResult& result);

// Sorts rows by (checkpoint, method, class; global last). Checkpoints with a
// trailing epoch number sort numerically.
void sort_score_rows(std::vector<ScoreRow>& rows);

std::string format_cscore_report(std::vector<ScoreRow> rows);
void write_cscore_report(std::vector<ScoreRow> rows, const fs::path& path);
std::vector<ScoreRow> read_cscore_report(const fs::path& path);

// Trailing integer of a checkpoint id ("E25" -> 25, "epoch_030" -> 30).
std::optional<int> checkpoint_epoch(std::string_view checkpoint);

/// Joins score rows with per-epoch metrics into a trajectory series. Missing
/// global rows are recomputed from the per-class rows.
TrajectorySeries assemble_series(std::span<const EpochMetrics> metrics,
                                 std::span<const ScoreRow> scores, const PhaseConfig& phases = {});

// ---------------------------------------------------------------------------
// Alerts JSON: array of {kind, epoch, method, class, evidence}

std::string format_alerts_json(std::span<const Alert> alerts);
void write_alerts_json(std::span<const Alert> alerts, const fs::path& path);

// ---------------------------------------------------------------------------

struct RunConfig {
  double tau = kDefaultTau;
  double alpha = kDefaultAlpha;
  std::vector<CamMethod> methods{kAllMethods.begin(), kAllMethods.end()};
  std::vector<std::string> ms_layers;  // empty: all target layers
  std::optional<std::array<std::size_t, 2>> ms_size;
  PhaseConfig phases;
  DetectorThresholds thresholds;
  unsigned workers = 0;

  // Throws ParameterError naming the violated bound.
  void validate() const;
};

// Writes `text` to `path`, throwing IoError on failure.
void write_text_file(const fs::path& path, std::string_view text);

}  // namespace cscore
