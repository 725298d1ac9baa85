#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cscore/tensor.hpp"

namespace cscore {

enum class CamMethod { GradCAM, GradCAMpp, LayerCAM, EigenCAM, ScoreCAM, MSGradCAMpp };

inline constexpr std::array<CamMethod, 6> kAllMethods = {
    CamMethod::GradCAM,  CamMethod::GradCAMpp, CamMethod::LayerCAM,
    CamMethod::EigenCAM, CamMethod::ScoreCAM,  CamMethod::MSGradCAMpp};

// Serialized names: gradcam, gradcampp, layercam, eigencam, scorecam, msgradcampp.
std::string_view method_name(CamMethod m);
// Throws ValidationError on an unknown name.
CamMethod parse_method(std::string_view name);
std::vector<CamMethod> parse_method_list(std::string_view comma_separated);

bool method_needs_gradients(CamMethod m);

// Everything exported for one image at one layer.
struct ActivationBundle {
  std::string layer_id;
  Tensor3D activations;
  std::optional<Tensor3D> gradients;            // d y^c / d A, same shape as activations
  std::optional<std::vector<double>> channel_scores;  // ScoreCAM per-channel weights
  int class_id = 0;
  std::string image_id;

  // Throws ValidationError if gradients / channel_scores disagree with the
  // activation shape.
  void validate() const;
};

/// GradCAM: channel weights are the spatial mean of the class gradient.
Heatmap gradcam(const ActivationBundle& b);

/// GradCAM++ with the closed-form pixel weights
///   a = g^2 / (2 g^2 + sum_uv(A) * g^3)   (a = 0 where the denominator is 0)
/// and channel weights sum_ij a * ReLU(g).
Heatmap gradcam_pp(const ActivationBundle& b);

/// LayerCAM: sum_k ReLU(g_k) * A_k.
Heatmap layercam(const ActivationBundle& b);

/// EigenCAM: projection of the (H*W) x C activation matrix onto its first
/// right singular vector, sign fixed so the projection has non-negative mean.
Heatmap eigencam(const ActivationBundle& b);

/// ScoreCAM composition from exporter-supplied channel scores.
Heatmap scorecam(const ActivationBundle& b);

/// Multi-scale GradCAM++: GradCAM++ per bundle, bilinear upsampling to
/// (out_h, out_w), pixel-wise mean, renormalisation.
Heatmap ms_gradcam_pp(std::span<const ActivationBundle> bundles, std::size_t out_h,
                      std::size_t out_w);

/// The aggregation step of ms_gradcam_pp: resize every map, average, normalise.
Heatmap mean_aggregate(std::span<const Tensor2D> maps, std::size_t out_h, std::size_t out_w);

/// Dispatches to one of the single-layer methods. MSGradCAMpp with a single
/// bundle resolves to ms_gradcam_pp at that bundle's spatial shape.
Heatmap compose(CamMethod m, const ActivationBundle& b);

// Top right singular vector of a row-major rows x cols matrix, computed by
// power iteration on the smaller Gram matrix. Exposed for tests.
struct TopSingular {
  std::vector<double> left;   // length rows, unit norm (sign arbitrary)
  std::vector<double> right;  // length cols, unit norm
  double sigma = 0.0;
  int iterations = 0;
};
TopSingular top_singular_vectors(std::span<const float> matrix, std::size_t rows,
                                 std::size_t cols, double tol = 1e-10, int max_iter = 1000);

}  // namespace cscore
