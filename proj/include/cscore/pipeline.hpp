#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cscore/io.hpp"

namespace cscore {

/// Composes the heatmap of one manifest image for `method`. Single-layer
/// methods use the first target layer; MS-GradCAM++ uses config.ms_layers
/// (all target layers when empty) upsampled to ms_output_size().
Heatmap compose_image(const BundleManifest& manifest, std::size_t image_index, CamMethod method,
                      const RunConfig& config);

// Output size for MS-GradCAM++: config override, else the manifest's
// input_size, else the largest spatial extent among the aggregated layers.
std::array<std::size_t, 2> ms_output_size(const BundleManifest& manifest, const RunConfig& config);

/// Gold list for one class from a manifest's labels and confidences.
GoldList manifest_gold_list(const BundleManifest& manifest, int class_id, double tau);

/// Scores every configured method and class of one checkpoint. With a
/// reference manifest, gold-list membership and confidences come from the
/// reference checkpoint while heatmaps come from `manifest`.
std::vector<GlobalConsistencyResult> score_checkpoint(
    const BundleManifest& manifest, const RunConfig& config,
    const BundleManifest* reference = nullptr);

}  // namespace cscore
