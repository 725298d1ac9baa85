#include "cscore/trajectory.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <tuple>

#include "cscore/errors.hpp"

namespace cscore {

std::string_view phase_name(Phase p) { return p == Phase::TL ? "TL" : "FT"; }

Phase parse_phase(std::string_view s) {
  if (s == "TL") return Phase::TL;
  if (s == "FT") return Phase::FT;
  throw ValidationError("unknown phase '" + std::string(s) + "' (expected TL or FT)");
}

Phase phase_of(int epoch, const PhaseConfig& config) {
  if (epoch < 1) throw ParameterError("epoch must be >= 1, got " + std::to_string(epoch));
  return epoch <= config.boundary ? Phase::TL : Phase::FT;
}

std::optional<double> CheckpointRecord::global_score(CamMethod m) const {
  if (auto it = global.find(m); it != global.end()) return it->second;
  return std::nullopt;
}

std::size_t CheckpointRecord::total_gold() const {
  std::size_t total = 0;
  for (const auto& [cls, n] : gold_sizes) total += n;
  return total;
}

TrajectorySeries::TrajectorySeries(std::vector<CheckpointRecord> records)
    : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const auto& a, const auto& b) { return a.epoch < b.epoch; });
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].epoch == records_[i - 1].epoch) {
      throw ValidationError("duplicate epoch " + std::to_string(records_[i].epoch) +
                            " in trajectory series");
    }
  }
}

const CheckpointRecord& TrajectorySeries::at_epoch(int epoch) const {
  const auto it = std::find_if(records_.begin(), records_.end(),
                               [&](const auto& r) { return r.epoch == epoch; });
  if (it == records_.end()) {
    throw LookupError("epoch " + std::to_string(epoch) + " not present in series");
  }
  return *it;
}

std::vector<CamMethod> TrajectorySeries::methods() const {
  std::set<CamMethod> seen;
  for (const auto& r : records_) {
    for (const auto& [m, v] : r.global) seen.insert(m);
    for (const auto& [key, v] : r.per_class) seen.insert(key.first);
  }
  return {seen.begin(), seen.end()};
}

std::string_view alert_kind_name(AlertKind k) {
  switch (k) {
    case AlertKind::GoldListCollapse: return "GoldListCollapse";
    case AlertKind::AttributionCollapse: return "AttributionCollapse";
    case AlertKind::ClassMasking: return "ClassMasking";
  }
  return "Unknown";
}

double net_change(const TrajectorySeries& series, CamMethod method, int epoch_from, int epoch_to) {
  auto score = [&](int epoch) {
    const auto s = series.at_epoch(epoch).global_score(method);
    if (!s) {
      throw LookupError("no global " + std::string(method_name(method)) + " score at epoch " +
                        std::to_string(epoch));
    }
    return *s;
  };
  return score(epoch_to) - score(epoch_from);
}

std::vector<Alert> detect_goldlist_collapse(const TrajectorySeries& series,
                                            const DetectorThresholds& t) {
  std::vector<Alert> alerts;
  for (const auto& r : series.records()) {
    if (r.auc < t.auc_floor) continue;
    for (const auto& [cls, n] : r.gold_sizes) {
      if (n != 0) continue;
      alerts.push_back({AlertKind::GoldListCollapse, r.epoch, std::nullopt, cls,
                        {{"auc", r.auc}, {"accuracy", r.accuracy}, {"gold_size", 0.0},
                         {"auc_floor", t.auc_floor}}});
    }
  }
  return alerts;
}

std::vector<Alert> detect_attribution_collapse(const TrajectorySeries& series, CamMethod method,
                                               const DetectorThresholds& t, CollapseMode mode) {
  std::vector<Alert> alerts;
  const auto records = series.records();
  auto collapsed = [&](double prev, double cur) {
    return cur < t.drop_ratio * prev && cur < t.collapse_floor;
  };
  for (std::size_t i = 1; i < records.size(); ++i) {
    const CheckpointRecord& before = records[i - 1];
    const CheckpointRecord& now = records[i];
    if (now.auc < t.auc_floor) continue;  // concurrent failure, not an early warning
    if (mode == CollapseMode::Global) {
      const auto prev = before.global_score(method);
      const auto cur = now.global_score(method);
      if (!prev || !cur) continue;
      if (!now.gold_sizes.empty() && now.total_gold() == 0) continue;  // gold-list territory
      if (collapsed(*prev, *cur)) {
        alerts.push_back({AlertKind::AttributionCollapse, now.epoch, method, std::nullopt,
                          {{"previous_epoch", static_cast<double>(before.epoch)},
                           {"previous_cscore", *prev},
                           {"cscore", *cur},
                           {"auc", now.auc}}});
      }
      continue;
    }
    for (const auto& [key, score] : now.per_class) {
      if (key.first != method || score.gold_size == 0) continue;
      const auto it = before.per_class.find(key);
      if (it == before.per_class.end() || it->second.gold_size == 0) continue;
      if (collapsed(it->second.cscore, score.cscore)) {
        alerts.push_back({AlertKind::AttributionCollapse, now.epoch, method, key.second,
                          {{"previous_epoch", static_cast<double>(before.epoch)},
                           {"previous_cscore", it->second.cscore},
                           {"cscore", score.cscore},
                           {"auc", now.auc}}});
      }
    }
  }
  return alerts;
}

std::vector<Alert> detect_class_masking(const TrajectorySeries& series, CamMethod method,
                                        const DetectorThresholds& t) {
  std::vector<Alert> alerts;
  for (const auto& r : series.records()) {
    std::optional<std::pair<int, double>> lo;
    std::optional<std::pair<int, double>> hi;
    int classes = 0;
    for (const auto& [key, score] : r.per_class) {
      if (key.first != method || score.gold_size == 0) continue;
      ++classes;
      if (!lo || score.cscore < lo->second) lo = {key.second, score.cscore};
      if (!hi || score.cscore > hi->second) hi = {key.second, score.cscore};
    }
    if (classes < 2) continue;
    const double gap = hi->second - lo->second;
    if (gap >= t.gap_min) {
      std::vector<std::pair<std::string, double>> evidence = {
          {"gap", gap},
          {"high_class", static_cast<double>(hi->first)},
          {"high_cscore", hi->second},
          {"low_class", static_cast<double>(lo->first)},
          {"low_cscore", lo->second},
          {"auc", r.auc}};
      if (const auto g = r.global_score(method)) evidence.emplace_back("global_cscore", *g);
      alerts.push_back({AlertKind::ClassMasking, r.epoch, method, lo->first, std::move(evidence)});
    }
  }
  return alerts;
}

std::vector<Alert> detect_all(const TrajectorySeries& series, const DetectorThresholds& t,
                              CollapseMode mode) {
  std::vector<Alert> all = detect_goldlist_collapse(series, t);
  for (CamMethod m : series.methods()) {
    for (auto& a : detect_attribution_collapse(series, m, t, mode)) all.push_back(std::move(a));
    for (auto& a : detect_class_masking(series, m, t)) all.push_back(std::move(a));
  }
  std::stable_sort(all.begin(), all.end(), [](const Alert& a, const Alert& b) {
    return std::tuple(a.epoch, a.kind, a.method.value_or(CamMethod::GradCAM), a.class_id.value_or(-1)) <
           std::tuple(b.epoch, b.kind, b.method.value_or(CamMethod::GradCAM), b.class_id.value_or(-1));
  });
  return all;
}

}  // namespace cscore
