#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cscore/cam.hpp"

namespace cscore {

enum class Phase { TL, FT };  // transfer learning / fine-tuning

std::string_view phase_name(Phase p);
Phase parse_phase(std::string_view s);

struct PhaseConfig {
  int boundary = 20;  // last transfer-learning epoch (inclusive)
};

/// TL iff epoch <= boundary. Throws ParameterError for epoch < 1.
Phase phase_of(int epoch, const PhaseConfig& config = {});

struct ClassScore {
  double cscore = 0.0;
  std::size_t gold_size = 0;
};

// One evaluated checkpoint: classification metrics plus C-Scores.
struct CheckpointRecord {
  int epoch = 0;
  Phase phase = Phase::TL;
  double auc = 0.0;
  double accuracy = 0.0;
  std::map<std::pair<CamMethod, int>, ClassScore> per_class;
  std::map<CamMethod, double> global;
  std::map<int, std::size_t> gold_sizes;  // per class, method-independent

  std::optional<double> global_score(CamMethod m) const;
  std::size_t total_gold() const;
};

// Checkpoint records ordered by strictly increasing epoch.
class TrajectorySeries {
 public:
  TrajectorySeries() = default;
  // Sorts by epoch; throws ValidationError on duplicate epochs.
  explicit TrajectorySeries(std::vector<CheckpointRecord> records);

  std::span<const CheckpointRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const CheckpointRecord& at_epoch(int epoch) const;  // LookupError if absent
  std::vector<CamMethod> methods() const;

 private:
  std::vector<CheckpointRecord> records_;
};

enum class AlertKind { GoldListCollapse, AttributionCollapse, ClassMasking };
std::string_view alert_kind_name(AlertKind k);

struct Alert {
  AlertKind kind = AlertKind::GoldListCollapse;
  int epoch = 0;
  std::optional<CamMethod> method;
  std::optional<int> class_id;
  std::vector<std::pair<std::string, double>> evidence;
};

struct DetectorThresholds {
  double auc_floor = 0.95;
  double drop_ratio = 0.25;
  double collapse_floor = 0.10;
  double gap_min = 0.40;
};

enum class CollapseMode { Global, PerClass };

/// Global C-Score difference between two epochs: score(to) - score(from).
double net_change(const TrajectorySeries& series, CamMethod method, int epoch_from, int epoch_to);

/// Empty gold list for some class while AUC stays at or above auc_floor.
std::vector<Alert> detect_goldlist_collapse(const TrajectorySeries& series,
                                            const DetectorThresholds& t = {});

/// C-Score falls below drop_ratio of the previous checkpoint and below
/// collapse_floor while AUC is still at or above auc_floor.
std::vector<Alert> detect_attribution_collapse(const TrajectorySeries& series, CamMethod method,
                                               const DetectorThresholds& t = {},
                                               CollapseMode mode = CollapseMode::Global);

/// Gap between the best and worst per-class C-Score (classes with non-empty
/// gold lists only) of at least gap_min.
std::vector<Alert> detect_class_masking(const TrajectorySeries& series, CamMethod method,
                                        const DetectorThresholds& t = {});

// All three detectors over every method in the series, ordered by
// (epoch, kind, method, class).
std::vector<Alert> detect_all(const TrajectorySeries& series, const DetectorThresholds& t = {},
                              CollapseMode mode = CollapseMode::Global);

}  // namespace cscore
