#include "cscore/reference_tables.hpp"

#include <array>

#include "cscore/errors.hpp"

namespace cscore {
namespace {

constexpr std::array<int, 7> kCheckpointEpochs = {1, 5, 10, 15, 20, 25, 30};

struct MethodRow {
  CamMethod method;
  std::array<double, 7> values;
};

struct ClassRow {
  int class_id;
  CamMethod method;
  std::array<double, 7> values;
};

struct EmptyGold {
  int epoch;
  int class_id;
};

struct Table {
  const char* architecture;
  std::vector<EpochMetrics> metrics;
  std::vector<MethodRow> global;
  std::vector<ClassRow> per_class;
  std::vector<EmptyGold> empty_gold;  // (epoch, class) with no image above tau
};

// Gold sizes are not published per checkpoint: non-empty classes carry the
// full test support, and the two checkpoints where every test image was
// predicted Pneumonia (accuracy 855/1172 = 72.95%) carry an empty Normal list.
const std::vector<Table>& tables() {
  static const std::vector<Table> kTables = {
  {"densenet201",
   {
    {1, Phase::TL, 0.9184, 0.6160}, {2, Phase::TL, 0.9656, 0.8464}, {3, Phase::TL, 0.9657, 0.4548},
    {4, Phase::TL, 0.9804, 0.9096}, {5, Phase::TL, 0.9848, 0.9403}, {6, Phase::TL, 0.9855, 0.9258},
    {7, Phase::TL, 0.9859, 0.9497}, {8, Phase::TL, 0.9865, 0.9044}, {9, Phase::TL, 0.9882, 0.9480},
    {10, Phase::TL, 0.9886, 0.9488}, {11, Phase::TL, 0.9889, 0.9488}, {12, Phase::TL, 0.9890, 0.9514},
    {13, Phase::TL, 0.9893, 0.9531}, {14, Phase::TL, 0.9893, 0.9480}, {15, Phase::TL, 0.9903, 0.9079},
    {16, Phase::TL, 0.9890, 0.9573}, {17, Phase::TL, 0.9901, 0.9573}, {18, Phase::TL, 0.9902, 0.9590},
    {19, Phase::TL, 0.9899, 0.9514}, {20, Phase::TL, 0.9902, 0.9480}, {21, Phase::FT, 0.9842, 0.2773},
    {22, Phase::FT, 0.9852, 0.2705}, {23, Phase::FT, 0.9891, 0.2705}, {24, Phase::FT, 0.9910, 0.8370},
    {25, Phase::FT, 0.9867, 0.7295}, {26, Phase::FT, 0.9844, 0.7295}, {27, Phase::FT, 0.9931, 0.9693},
    {28, Phase::FT, 0.9927, 0.9676}, {29, Phase::FT, 0.9941, 0.8677}, {30, Phase::FT, 0.9945, 0.9420},
   },
   {
    {CamMethod::GradCAM, {0.113, 0.168, 0.170, 0.198, 0.197, 0.744, 0.807}},
    {CamMethod::GradCAMpp, {0.358, 0.461, 0.546, 0.566, 0.549, 0.916, 0.870}},
    {CamMethod::LayerCAM, {0.403, 0.479, 0.569, 0.583, 0.559, 0.915, 0.871}},
    {CamMethod::ScoreCAM, {0.460, 0.563, 0.622, 0.632, 0.630, 0.933, 0.880}},
    {CamMethod::EigenCAM, {0.635, 0.634, 0.635, 0.636, 0.635, 0.908, 0.846}},
    {CamMethod::MSGradCAMpp, {0.322, 0.380, 0.439, 0.460, 0.445, 0.644, 0.618}},
   },
   {
    {0, CamMethod::GradCAM, {0.159, 0.593, 0.606, 0.663, 0.664, 0.000, 0.924}},
    {0, CamMethod::GradCAMpp, {0.424, 0.669, 0.694, 0.728, 0.718, 0.000, 0.918}},
    {0, CamMethod::LayerCAM, {0.471, 0.672, 0.696, 0.729, 0.716, 0.000, 0.919}},
    {0, CamMethod::ScoreCAM, {0.539, 0.621, 0.688, 0.738, 0.714, 0.000, 0.907}},
    {0, CamMethod::EigenCAM, {0.680, 0.682, 0.688, 0.689, 0.688, 0.000, 0.895}},
    {0, CamMethod::MSGradCAMpp, {0.370, 0.504, 0.535, 0.586, 0.573, 0.000, 0.674}},
    {1, CamMethod::GradCAM, {0.078, 0.007, 0.002, 0.004, 0.014, 0.744, 0.761}},
    {1, CamMethod::GradCAMpp, {0.310, 0.382, 0.490, 0.498, 0.483, 0.916, 0.851}},
    {1, CamMethod::LayerCAM, {0.352, 0.406, 0.520, 0.522, 0.498, 0.915, 0.852}},
    {1, CamMethod::ScoreCAM, {0.401, 0.541, 0.597, 0.587, 0.597, 0.933, 0.869}},
    {1, CamMethod::EigenCAM, {0.603, 0.615, 0.615, 0.614, 0.614, 0.908, 0.826}},
    {1, CamMethod::MSGradCAMpp, {0.286, 0.333, 0.402, 0.408, 0.395, 0.644, 0.596}},
   },
   {
    {25, 0}
   }},
  {"inceptionv3",
   {
    {1, Phase::TL, 0.8705, 0.6613}, {2, Phase::TL, 0.9310, 0.6433}, {3, Phase::TL, 0.9509, 0.6997},
    {4, Phase::TL, 0.9542, 0.8635}, {5, Phase::TL, 0.9592, 0.7833}, {6, Phase::TL, 0.9626, 0.8046},
    {7, Phase::TL, 0.9602, 0.8549}, {8, Phase::TL, 0.9641, 0.8413}, {9, Phase::TL, 0.9633, 0.8763},
    {10, Phase::TL, 0.9664, 0.8686}, {11, Phase::TL, 0.9673, 0.8720}, {12, Phase::TL, 0.9672, 0.8703},
    {13, Phase::TL, 0.9675, 0.8899}, {14, Phase::TL, 0.9661, 0.8823}, {15, Phase::TL, 0.9679, 0.8891},
    {16, Phase::TL, 0.9661, 0.8925}, {17, Phase::TL, 0.9678, 0.8788}, {18, Phase::TL, 0.9676, 0.8746},
    {19, Phase::TL, 0.9684, 0.8882}, {20, Phase::TL, 0.9680, 0.8933}, {21, Phase::FT, 0.9297, 0.8430},
    {22, Phase::FT, 0.9648, 0.7295}, {23, Phase::FT, 0.9836, 0.2875}, {24, Phase::FT, 0.9892, 0.6920},
    {25, Phase::FT, 0.9902, 0.9676}, {26, Phase::FT, 0.9930, 0.3823}, {27, Phase::FT, 0.9925, 0.8746},
    {28, Phase::FT, 0.9949, 0.9761}, {29, Phase::FT, 0.9943, 0.9462}, {30, Phase::FT, 0.9949, 0.9462},
   },
   {
    {CamMethod::GradCAM, {0.169, 0.242, 0.209, 0.195, 0.196, 0.875, 0.244}},
    {CamMethod::GradCAMpp, {0.475, 0.508, 0.492, 0.484, 0.485, 0.808, 0.762}},
    {CamMethod::LayerCAM, {0.567, 0.583, 0.572, 0.567, 0.568, 0.802, 0.763}},
    {CamMethod::ScoreCAM, {0.392, 0.386, 0.383, 0.381, 0.379, 0.790, 0.759}},
    {CamMethod::EigenCAM, {0.758, 0.759, 0.758, 0.757, 0.756, 0.896, 0.852}},
    {CamMethod::MSGradCAMpp, {0.419, 0.417, 0.417, 0.415, 0.419, 0.659, 0.654}},
   },
   {
    {0, CamMethod::GradCAM, {0.047, 0.288, 0.380, 0.317, 0.335, 0.840, 0.847}},
    {0, CamMethod::GradCAMpp, {0.469, 0.542, 0.536, 0.516, 0.509, 0.872, 0.851}},
    {0, CamMethod::LayerCAM, {0.613, 0.642, 0.631, 0.620, 0.623, 0.866, 0.852}},
    {0, CamMethod::ScoreCAM, {0.292, 0.332, 0.303, 0.286, 0.286, 0.845, 0.852}},
    {0, CamMethod::EigenCAM, {0.770, 0.777, 0.775, 0.774, 0.774, 0.938, 0.922}},
    {0, CamMethod::MSGradCAMpp, {0.393, 0.407, 0.407, 0.400, 0.396, 0.753, 0.759}},
    {1, CamMethod::GradCAM, {0.244, 0.218, 0.138, 0.146, 0.140, 0.887, 0.008}},
    {1, CamMethod::GradCAMpp, {0.479, 0.491, 0.474, 0.471, 0.475, 0.785, 0.728}},
    {1, CamMethod::LayerCAM, {0.539, 0.553, 0.548, 0.546, 0.546, 0.779, 0.728}},
    {1, CamMethod::ScoreCAM, {0.453, 0.414, 0.416, 0.419, 0.417, 0.770, 0.723}},
    {1, CamMethod::EigenCAM, {0.750, 0.750, 0.750, 0.750, 0.749, 0.881, 0.825}},
    {1, CamMethod::MSGradCAMpp, {0.435, 0.422, 0.421, 0.421, 0.429, 0.626, 0.613}},
   },
   {
    
   }},
  {"resnet50v2",
   {
    {1, Phase::TL, 0.9582, 0.8148}, {2, Phase::TL, 0.9760, 0.9420}, {3, Phase::TL, 0.9807, 0.8242},
    {4, Phase::TL, 0.9800, 0.9471}, {5, Phase::TL, 0.9876, 0.9582}, {6, Phase::TL, 0.9885, 0.9556},
    {7, Phase::TL, 0.9859, 0.9582}, {8, Phase::TL, 0.9888, 0.9079}, {9, Phase::TL, 0.9894, 0.9471},
    {10, Phase::TL, 0.9892, 0.9352}, {11, Phase::TL, 0.9908, 0.9505}, {12, Phase::TL, 0.9909, 0.9428},
    {13, Phase::TL, 0.9895, 0.9590}, {14, Phase::TL, 0.9900, 0.8439}, {15, Phase::TL, 0.9902, 0.9497},
    {16, Phase::TL, 0.9893, 0.9206}, {17, Phase::TL, 0.9901, 0.9249}, {18, Phase::TL, 0.9891, 0.9462},
    {19, Phase::TL, 0.9888, 0.9514}, {20, Phase::TL, 0.9898, 0.9420}, {21, Phase::FT, 0.9876, 0.7986},
    {22, Phase::FT, 0.9807, 0.4249}, {23, Phase::FT, 0.0287, 0.7099}, {24, Phase::FT, 0.9885, 0.4445},
    {25, Phase::FT, 0.9902, 0.7875}, {26, Phase::FT, 0.9868, 0.8234}, {27, Phase::FT, 0.9933, 0.9539},
    {28, Phase::FT, 0.9938, 0.7491}, {29, Phase::FT, 0.9947, 0.9701}, {30, Phase::FT, 0.1034, 0.7295},
   },
   {
    {CamMethod::GradCAM, {0.422, 0.387, 0.573, 0.400, 0.385, 0.272, 0.370}},
    {CamMethod::GradCAMpp, {0.320, 0.613, 0.642, 0.607, 0.593, 0.676, 0.478}},
    {CamMethod::LayerCAM, {0.513, 0.667, 0.681, 0.662, 0.654, 0.675, 0.489}},
    {CamMethod::ScoreCAM, {0.517, 0.698, 0.629, 0.621, 0.612, 0.014, 0.000}},
    {CamMethod::EigenCAM, {0.589, 0.685, 0.693, 0.692, 0.688, 0.678, 0.495}},
    {CamMethod::MSGradCAMpp, {0.313, 0.508, 0.527, 0.508, 0.507, 0.533, 0.409}},
   },
   {
    {0, CamMethod::GradCAM, {0.333, 0.095, 0.573, 0.455, 0.481, 0.798, 0.000}},
    {0, CamMethod::GradCAMpp, {0.364, 0.656, 0.662, 0.643, 0.634, 0.798, 0.000}},
    {0, CamMethod::LayerCAM, {0.517, 0.715, 0.711, 0.696, 0.688, 0.798, 0.000}},
    {0, CamMethod::ScoreCAM, {0.508, 0.882, 0.652, 0.645, 0.649, 0.041, 0.000}},
    {0, CamMethod::EigenCAM, {0.593, 0.745, 0.727, 0.728, 0.723, 0.802, 0.000}},
    {0, CamMethod::MSGradCAMpp, {0.333, 0.495, 0.518, 0.508, 0.508, 0.595, 0.000}},
    {1, CamMethod::GradCAM, {0.463, 0.493, 0.572, 0.379, 0.348, 0.000, 0.370}},
    {1, CamMethod::GradCAMpp, {0.300, 0.598, 0.635, 0.593, 0.578, 0.613, 0.478}},
    {1, CamMethod::LayerCAM, {0.511, 0.650, 0.669, 0.648, 0.640, 0.611, 0.489}},
    {1, CamMethod::ScoreCAM, {0.521, 0.632, 0.621, 0.611, 0.597, 0.000, 0.000}},
    {1, CamMethod::EigenCAM, {0.587, 0.664, 0.680, 0.678, 0.675, 0.614, 0.495}},
    {1, CamMethod::MSGradCAMpp, {0.303, 0.512, 0.530, 0.507, 0.507, 0.500, 0.409}},
   },
   {
    {30, 0}
   }},
  };
  return kTables;
}

std::size_t support(const Table& t, int epoch, int class_id) {
  for (const auto& e : t.empty_gold) {
    if (e.epoch == epoch && e.class_id == class_id) return 0;
  }
  return class_id == 0 ? kReferenceNormalSupport : kReferencePneumoniaSupport;
}

}  // namespace

std::vector<ReferenceTrajectory> reference_trajectories() {
  std::vector<ReferenceTrajectory> out;
  for (const Table& t : tables()) {
    ReferenceTrajectory r{t.architecture, t.metrics, {}};
    for (std::size_t e = 0; e < kCheckpointEpochs.size(); ++e) {
      const int epoch = kCheckpointEpochs[e];
      const std::string checkpoint = "E" + std::to_string(epoch);
      for (const ClassRow& row : t.per_class) {
        ScoreRow s{checkpoint, row.method, row.class_id, row.values[e],
                   support(t, epoch, row.class_id), {}};
        if (s.gold_size == 0) s.flags.emplace_back("empty_gold");
        r.scores.push_back(std::move(s));
      }
      for (const MethodRow& row : t.global) {
        const std::size_t total = support(t, epoch, 0) + support(t, epoch, 1);
        r.scores.push_back({checkpoint, row.method, std::nullopt, row.values[e], total, {}});
      }
    }
    sort_score_rows(r.scores);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<fs::path> write_reference_fixtures(const fs::path& dir) {
  std::vector<fs::path> written;
  for (const ReferenceTrajectory& r : reference_trajectories()) {
    const fs::path sub = dir / r.architecture;
    std::error_code ec;
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
    write_epoch_metrics(r.metrics, sub / "epoch_metrics.csv");
    write_cscore_report(r.scores, sub / "scores.csv");
    written.push_back(sub);
  }
  return written;
}

}  // namespace cscore
