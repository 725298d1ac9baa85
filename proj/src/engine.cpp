#include "cscore/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>
#include <unordered_set>

#include "cscore/errors.hpp"

namespace cscore {

GoldList form_gold_list(std::span<const std::string> image_ids, std::span<const int> labels,
                        std::span<const double> confidences, int class_id, double tau,
                        std::string checkpoint_id) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ParameterError("tau must be in (0, 1), got " + std::to_string(tau));
  }
  if (image_ids.size() != labels.size() || labels.size() != confidences.size()) {
    throw ValidationError("form_gold_list: " + std::to_string(image_ids.size()) + " ids, " +
                          std::to_string(labels.size()) + " labels and " +
                          std::to_string(confidences.size()) + " confidences are misaligned");
  }
  std::unordered_set<std::string_view> seen;
  GoldList gold{class_id, std::move(checkpoint_id), {}, tau};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!seen.insert(image_ids[i]).second) {
      throw ValidationError("form_gold_list: duplicate image id '" + image_ids[i] + "'");
    }
    const double p = confidences[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("form_gold_list: confidence for '" + image_ids[i] +
                            "' outside [0, 1]: " + std::to_string(p));
    }
    if (labels[i] == class_id && p >= tau) gold.members.push_back({image_ids[i], p});
  }
  return gold;
}

namespace {

void require_unit_range(const Tensor2D& t, const char* what) {
  for (float v : t.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ValidationError(std::string(what) + ": heatmap value outside [0, 1]");
    }
  }
}

}  // namespace

SoftIoU soft_iou(const Tensor2D& a, const Tensor2D& b) {
  if (!a.same_shape(b)) {
    throw ValidationError("soft_iou: shape mismatch " + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                          "x" + std::to_string(b.width()));
  }
  require_unit_range(a, "soft_iou");
  require_unit_range(b, "soft_iou");
  std::vector<float> both(a.values().begin(), a.values().end());
  both.insert(both.end(), b.values().begin(), b.values().end());
  const auto sums = detail::pair_sums(both, 2, a.size(), 1);
  if (sums.max_sum[0] == 0.0) return {0.0, true};
  return {sums.min_sum[0] / sums.max_sum[0], false};
}

namespace {

// Rounds to `bits` significant bits (round-half-even on the scaled value).
double round_significand(double v, int bits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  int exp = 0;
  const double mant = std::frexp(v, &exp);  // v = mant * 2^exp, 0.5 <= |mant| < 1
  return std::ldexp(std::nearbyint(std::ldexp(mant, bits)), exp - bits);
}

std::vector<std::size_t> canonical_order(const GoldList& gold) {
  std::vector<std::size_t> order(gold.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return gold.members[x].image_id < gold.members[y].image_id;
  });
  return order;
}

// Weights in the given member order.
std::vector<double> weights_in_order(const GoldList& gold, std::span<const std::size_t> order) {
  std::vector<double> p(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) p[r] = gold.members[order[r]].confidence;
  const double total = tree_sum(p);
  std::vector<double> w(order.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t r = 0; r < w.size(); ++r) {
      w[r] = round_significand(p[r] / total, kWeightSignificandBits);
    }
  } else {
    // All-zero confidences only arise with hand-built gold lists; weight uniformly.
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  }
  return w;
}

}  // namespace

std::optional<std::vector<double>> confidence_weights(const GoldList& gold) {
  if (gold.empty()) return std::nullopt;
  const auto order = canonical_order(gold);
  const auto sorted = weights_in_order(gold, order);
  std::vector<double> w(gold.size());
  for (std::size_t r = 0; r < order.size(); ++r) w[order[r]] = sorted[r];
  return w;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CSCORE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct EmphasisedSet {
  std::vector<float> data;  // count x pixels
  std::vector<bool> all_zero;
  std::size_t pixels = 0;
};

// Emphasises each map once. `order` selects and orders the inputs.
EmphasisedSet emphasise(std::span<const Heatmap> heatmaps, std::span<const std::size_t> order,
                        double alpha, const char* what) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError(std::string(what) + ": alpha must be > 0, got " + std::to_string(alpha));
  }
  EmphasisedSet set;
  if (order.empty()) return set;
  const Heatmap& first = heatmaps[order[0]];
  set.pixels = first.map.size();
  set.data.reserve(order.size() * set.pixels);
  set.all_zero.reserve(order.size());
  for (std::size_t idx : order) {
    const Heatmap& h = heatmaps[idx];
    if (!h.map.same_shape(first.map)) {
      throw ValidationError(std::string(what) + ": heatmap " + std::to_string(idx) + " is " +
                            std::to_string(h.height()) + "x" + std::to_string(h.width()) +
                            ", expected " + std::to_string(first.height()) + "x" +
                            std::to_string(first.width()));
    }
    require_unit_range(h.map, what);
    const Heatmap e = power_emphasis(h, alpha);
    const auto v = e.map.values();
    set.data.insert(set.data.end(), v.begin(), v.end());
    set.all_zero.push_back(std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; }));
  }
  return set;
}

double pair_value(const detail::PairSums& sums, std::size_t k) {
  return sums.max_sum[k] > 0.0 ? sums.min_sum[k] / sums.max_sum[k] : 0.0;
}

}  // namespace

ClassConsistencyResult class_cscore(std::span<const Heatmap> heatmaps, const GoldList& gold,
                                    double alpha, CamMethod method, const KernelOptions& options) {
  if (heatmaps.size() != gold.size()) {
    throw ValidationError("class_cscore: " + std::to_string(heatmaps.size()) +
                          " heatmaps for a gold list of " + std::to_string(gold.size()));
  }
  ClassConsistencyResult result;
  result.class_id = gold.class_id;
  result.method = method;
  result.gold_size = gold.size();

  const auto order = canonical_order(gold);
  const EmphasisedSet set = emphasise(heatmaps, order, alpha, "class_cscore");
  if (gold.empty()) {
    result.empty_gold = true;
    return result;
  }
  if (gold.size() == 1) {
    result.singleton_gold = true;
    return result;
  }

  const std::size_t n = gold.size();
  const auto sums = detail::pair_sums(set.data, n, set.pixels, resolve_workers(options.workers));

  // Per-member mean similarity to the others, m_i = sum_{j != i} s_ij / (n - 1).
  // Then sum_{i<j} (w_i + w_j) s_ij = sum_i w_i (n - 1) m_i and
  // sum_{i<j} (w_i + w_j) = (n - 1) sum_i w_i, so C = sum_i w_i m_i / sum_i w_i.
  std::vector<double> row(n - 1);
  std::vector<double> mean_sim(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const std::size_t a = std::min(i, j);
      const std::size_t b = std::max(i, j);
      const std::size_t k = a * (2 * n - a - 1) / 2 + (b - a - 1);
      row[r++] = pair_value(sums, k);
    }
    mean_sim[i] = tree_sum(row) / static_cast<double>(n - 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (set.all_zero[i] || set.all_zero[j]) ++result.degenerate_pairs;
    }
  }

  const std::vector<double> w = weights_in_order(gold, order);
  std::vector<double> weighted(n);
  for (std::size_t i = 0; i < n; ++i) weighted[i] = w[i] * mean_sim[i];
  const double c = tree_sum(weighted) / tree_sum(w);
  result.cscore = std::clamp(c, 0.0, 1.0);
  return result;
}

GlobalConsistencyResult global_cscore(std::span<const ClassConsistencyResult> per_class) {
  if (per_class.empty()) throw ValidationError("global_cscore: no classes given");
  GlobalConsistencyResult g;
  g.method = per_class.front().method;
  g.per_class.assign(per_class.begin(), per_class.end());
  double support = 0.0;
  double weighted = 0.0;
  for (const auto& c : per_class) {
    g.supports.push_back(c.gold_size);
    if (c.gold_size == 0) continue;
    support += static_cast<double>(c.gold_size);
    weighted += static_cast<double>(c.gold_size) * c.cscore;
  }
  if (support == 0.0) {
    g.all_empty = true;
    g.cscore = 0.0;
    return g;
  }
  g.cscore = std::clamp(weighted / support, 0.0, 1.0);
  return g;
}

SimilarityMatrix pairwise_matrix(std::span<const Heatmap> heatmaps, double alpha,
                                 const KernelOptions& options) {
  if (heatmaps.empty()) throw ValidationError("pairwise_matrix: no heatmaps given");
  std::vector<std::size_t> order(heatmaps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const EmphasisedSet set = emphasise(heatmaps, order, alpha, "pairwise_matrix");
  const std::size_t n = heatmaps.size();
  const auto sums = detail::pair_sums(set.data, n, set.pixels, resolve_workers(options.workers));

  SimilarityMatrix m{n, std::vector<double>(n * n, 0.0)};
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m.values[i * n + i] = set.all_zero[i] ? 0.0 : 1.0;
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double s = pair_value(sums, k);
      m.values[i * n + j] = s;
      m.values[j * n + i] = s;
    }
  }
  return m;
}

}  // namespace cscore
