#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cscore/cam.hpp"
#include "cscore/tensor.hpp"

namespace cscore {

inline constexpr double kDefaultTau = 0.5;
inline constexpr double kDefaultAlpha = 2.0;

struct GoldMember {
  std::string image_id;
  double confidence = 0.0;
};

// Correctly classified, above-threshold images of one class at one checkpoint.
struct GoldList {
  int class_id = 0;
  std::string checkpoint_id;
  std::vector<GoldMember> members;
  double tau = kDefaultTau;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
};

/// Members are the images with label == class_id and confidence >= tau, in
/// input order. Throws ValidationError on misaligned inputs, duplicate ids
/// or confidences outside [0, 1]; ParameterError unless 0 < tau < 1.
GoldList form_gold_list(std::span<const std::string> image_ids, std::span<const int> labels,
                        std::span<const double> confidences, int class_id, double tau,
                        std::string checkpoint_id = {});

struct SoftIoU {
  double value = 0.0;
  bool degenerate = false;  // both maps all-zero
};

/// sum(min) / sum(max) with 64-bit accumulation. Throws ValidationError on
/// shape mismatch or values outside [0, 1].
SoftIoU soft_iou(const Tensor2D& a, const Tensor2D& b);

/// w_i = p_i / sum_j p_j, summed in canonical (sorted image id) order and
/// rounded to kWeightSignificandBits significant bits so that rescaling all
/// confidences by a common factor yields the same weights. Returns nullopt
/// for an empty gold list.
std::optional<std::vector<double>> confidence_weights(const GoldList& gold);
inline constexpr int kWeightSignificandBits = 36;

struct ClassConsistencyResult {
  int class_id = 0;
  CamMethod method = CamMethod::GradCAM;
  double cscore = 0.0;
  std::size_t gold_size = 0;
  std::size_t degenerate_pairs = 0;  // pairs involving an all-zero emphasised map
  bool empty_gold = false;
  bool singleton_gold = false;
};

struct GlobalConsistencyResult {
  CamMethod method = CamMethod::GradCAM;
  double cscore = 0.0;
  std::vector<ClassConsistencyResult> per_class;
  std::vector<std::size_t> supports;
  bool all_empty = false;
};

struct KernelOptions {
  // 0 selects CSCORE_WORKERS from the environment, else hardware concurrency.
  unsigned workers = 0;
};

// Resolves a requested worker count: explicit > CSCORE_WORKERS > hardware.
unsigned resolve_workers(unsigned requested);

/// Confidence-weighted, intensity-emphasised mean pairwise soft-IoU:
///   C = sum_{i<j} (w_i + w_j) s_ij / sum_{i<j} (w_i + w_j)
/// over maps emphasised by h^alpha. Pairs are visited in sorted image-id
/// order and per-pair sums have a fixed association order, so the result is
/// independent of input order and worker count.
ClassConsistencyResult class_cscore(std::span<const Heatmap> heatmaps, const GoldList& gold,
                                    double alpha, CamMethod method = CamMethod::GradCAM,
                                    const KernelOptions& options = {});

/// Support-weighted mean over classes with non-empty gold lists.
GlobalConsistencyResult global_cscore(std::span<const ClassConsistencyResult> per_class);

// Dense symmetric matrix of pairwise soft-IoU of the emphasised maps, in
// input order.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major n x n

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

SimilarityMatrix pairwise_matrix(std::span<const Heatmap> heatmaps, double alpha,
                                 const KernelOptions& options = {});

namespace detail {

// Raw per-pair (sum min, sum max) for maps stored contiguously
// (count x pixels). Pairs (i < j) are enumerated row-major; the returned
// vectors are indexed by that pair index.
struct PairSums {
  std::vector<double> min_sum;
  std::vector<double> max_sum;
};
// Auto uses the AVX2 path when the CPU has it; both paths are bitwise equal.
enum class KernelPath { Auto, Scalar };

PairSums pair_sums(std::span<const float> maps, std::size_t count, std::size_t pixels,
                   unsigned workers, KernelPath path = KernelPath::Auto);

}  // namespace detail

}  // namespace cscore
