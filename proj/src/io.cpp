#include "cscore/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "cscore/errors.hpp"
#include "json.hpp"

namespace cscore {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Tensor files

std::vector<float> read_tensor_file(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open tensor file " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected_count * sizeof(float)) {
    throw LoadError("tensor file " + path.string() + " holds " + std::to_string(bytes / 4) +
                    " floats, expected " + std::to_string(expected_count));
  }
  in.seekg(0);
  std::vector<float> values(expected_count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw LoadError("short read from tensor file " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) {
      auto u = std::bit_cast<std::uint32_t>(v);
      u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
      v = std::bit_cast<float>(u);
    }
  }
  return values;
}

void write_tensor_file(const fs::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write tensor file " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (float v : values) {
      auto u = std::bit_cast<std::uint32_t>(v);
      u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
      out.write(reinterpret_cast<const char*>(&u), sizeof u);
    }
  } else {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing tensor file " + path.string());
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::size_t file_floats(const fs::path& p) {
  std::error_code ec;
  const auto bytes = fs::file_size(p, ec);
  if (ec) throw LoadError("missing tensor file " + p.string());
  return static_cast<std::size_t>(bytes) / sizeof(float) + (bytes % sizeof(float) ? 1 : 0);
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw LoadError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw LoadError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::optional<std::size_t> BundleManifest::find_image(std::string_view image_id) const {
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].image_id == image_id) return i;
  }
  return std::nullopt;
}

ActivationBundle BundleManifest::load_bundle(std::size_t image_index,
                                             const std::string& layer_id) const {
  if (image_index >= images.size()) throw LookupError("image index out of range");
  const ImageEntry& img = images[image_index];
  const auto it = img.layers.find(layer_id);
  if (it == img.layers.end()) {
    throw LookupError("image " + img.image_id + " has no layer " + layer_id);
  }
  const LayerRef& ref = it->second;
  const auto [h, w, c] = ref.shape;
  const std::size_t count = h * w * c;
  ActivationBundle b;
  b.layer_id = layer_id;
  b.image_id = img.image_id;
  b.class_id = img.true_label;
  b.activations = Tensor3D(h, w, c, read_tensor_file(base_dir / ref.activations, count));
  if (ref.gradients) b.gradients = Tensor3D(h, w, c, read_tensor_file(base_dir / *ref.gradients, count));
  if (ref.channel_scores) {
    const auto s = read_tensor_file(base_dir / *ref.channel_scores, c);
    b.channel_scores = std::vector<double>(s.begin(), s.end());
  }
  return b;
}

BundleManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open manifest " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw LoadError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  const std::string where = "manifest " + path.string();
  BundleManifest m;
  m.base_dir = path.parent_path();
  m.version = get_field<int>(doc, "version", where);
  if (m.version != kManifestVersion) {
    throw LoadError(where + ": unsupported version " + std::to_string(m.version) +
                    " (expected " + std::to_string(kManifestVersion) + ")");
  }
  m.architecture = doc.value("architecture", "");
  m.checkpoint_id = get_field<std::string>(doc, "checkpoint_id", where);
  m.classes = get_field<std::vector<std::string>>(doc, "classes", where);
  m.target_layers = get_field<std::vector<std::string>>(doc, "target_layers", where);
  m.head = doc.value("head", "");
  m.scorecam_baseline = doc.value("scorecam_baseline", "");
  if (doc.contains("input_size")) {
    m.input_size = get_field<std::array<std::size_t, 2>>(doc, "input_size", where);
    if ((*m.input_size)[0] == 0 || (*m.input_size)[1] == 0) {
      throw LoadError(where + ": input_size must be positive");
    }
  }
  if (m.classes.empty()) throw LoadError(where + ": class list is empty");
  if (m.target_layers.empty()) throw LoadError(where + ": target_layers is empty");

  std::set<std::string> ids;
  for (const json& ji : get_field<json>(doc, "images", where)) {
    ImageEntry img;
    img.image_id = get_field<std::string>(ji, "image_id", where);
    const std::string iw = where + ", image " + img.image_id;
    if (!ids.insert(img.image_id).second) throw LoadError(iw + ": duplicate image_id");
    img.true_label = get_field<int>(ji, "true_label", iw);
    if (img.true_label < 0 || img.true_label >= static_cast<int>(m.classes.size())) {
      throw LoadError(iw + ": true_label out of range");
    }
    img.confidences = get_field<std::vector<double>>(ji, "confidences", iw);
    if (img.confidences.size() != m.classes.size()) {
      throw LoadError(iw + ": expected " + std::to_string(m.classes.size()) + " confidences");
    }
    for (double p : img.confidences) {
      if (!(p >= 0.0 && p <= 1.0)) throw LoadError(iw + ": confidence outside [0, 1]");
    }
    if (ji.contains("scorecam_channels")) {
      img.scorecam_channels = get_field<std::vector<int>>(ji, "scorecam_channels", iw);
    }
    const json layers = get_field<json>(ji, "layers", iw);
    for (const std::string& layer : m.target_layers) {
      if (!layers.contains(layer)) throw LoadError(iw + ": missing target layer " + layer);
    }
    for (const auto& [layer, jl] : layers.items()) {
      const std::string lw = iw + ", layer " + layer;
      LayerRef ref;
      ref.shape = get_field<std::array<std::size_t, 3>>(jl, "shape", lw);
      if (ref.shape[0] == 0 || ref.shape[1] == 0 || ref.shape[2] == 0) {
        throw LoadError(lw + ": shape dimensions must be positive");
      }
      const std::size_t count = ref.shape[0] * ref.shape[1] * ref.shape[2];
      auto check = [&](const fs::path& rel, std::size_t expected, const char* what) {
        const std::size_t found = file_floats(m.base_dir / rel);
        if (found != expected) {
          throw LoadError(lw + ": " + what + " file " + rel.string() + " holds " +
                          std::to_string(found) + " floats, declared shape needs " +
                          std::to_string(expected));
        }
      };
      ref.activations = get_field<std::string>(jl, "activations", lw);
      check(ref.activations, count, "activations");
      if (jl.contains("gradients")) {
        ref.gradients = fs::path(get_field<std::string>(jl, "gradients", lw));
        check(*ref.gradients, count, "gradients");
      }
      if (jl.contains("channel_scores")) {
        ref.channel_scores = fs::path(get_field<std::string>(jl, "channel_scores", lw));
        check(*ref.channel_scores, ref.shape[2], "channel_scores");
      }
      img.layers.emplace(layer, std::move(ref));
    }
    m.images.push_back(std::move(img));
  }
  return m;
}

void write_manifest(const BundleManifest& m, const fs::path& path) {
  const fs::path dir = path.parent_path();
  auto rel = [&](const fs::path& p) {
    const fs::path full = p.is_absolute() ? p : m.base_dir / p;
    std::error_code ec;
    const fs::path r = fs::relative(full, dir.empty() ? fs::path(".") : dir, ec);
    return (ec || r.empty()) ? full.generic_string() : r.generic_string();
  };
  json doc;
  doc["version"] = m.version;
  doc["architecture"] = m.architecture;
  doc["checkpoint_id"] = m.checkpoint_id;
  doc["classes"] = m.classes;
  doc["target_layers"] = m.target_layers;
  if (m.input_size) doc["input_size"] = *m.input_size;
  if (!m.head.empty()) doc["head"] = m.head;
  if (!m.scorecam_baseline.empty()) doc["scorecam_baseline"] = m.scorecam_baseline;
  json images = json::array();
  for (const ImageEntry& img : m.images) {
    json ji;
    ji["image_id"] = img.image_id;
    ji["true_label"] = img.true_label;
    ji["confidences"] = img.confidences;
    if (!img.scorecam_channels.empty()) ji["scorecam_channels"] = img.scorecam_channels;
    json layers = json::object();
    for (const auto& [layer, ref] : img.layers) {
      json jl;
      jl["shape"] = ref.shape;
      jl["activations"] = rel(ref.activations);
      if (ref.gradients) jl["gradients"] = rel(*ref.gradients);
      if (ref.channel_scores) jl["channel_scores"] = rel(*ref.channel_scores);
      layers[layer] = std::move(jl);
    }
    ji["layers"] = std::move(layers);
    images.push_back(std::move(ji));
  }
  doc["images"] = std::move(images);
  write_text_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV helpers

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line, const std::string& msg) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(std::string_view s, const fs::path& path, std::size_t line, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    parse_fail(path, line, std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.emplace_back(trim_cr(line));
  return lines;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

}  // namespace

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// epoch_metrics.csv

std::vector<EpochMetrics> read_epoch_metrics(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "epoch,phase,auc,accuracy") {
    parse_fail(path, 1, "expected header 'epoch,phase,auc,accuracy'");
  }
  std::vector<EpochMetrics> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (lines[n].empty()) continue;
    const auto f = split(lines[n], ',');
    if (f.size() != 4) parse_fail(path, line_no, "expected 4 fields");
    EpochMetrics r;
    r.epoch = parse_number<int>(f[0], path, line_no, "epoch");
    if (r.epoch < 1) parse_fail(path, line_no, "epoch must be >= 1");
    try {
      r.phase = parse_phase(f[1]);
    } catch (const ValidationError& e) {
      parse_fail(path, line_no, e.what());
    }
    r.auc = parse_number<double>(f[2], path, line_no, "auc");
    r.accuracy = parse_number<double>(f[3], path, line_no, "accuracy");
    if (!(r.auc >= 0.0 && r.auc <= 1.0)) parse_fail(path, line_no, "auc outside [0, 1]");
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0)) {
      parse_fail(path, line_no, "accuracy outside [0, 1] (store fractions, not percentages)");
    }
    if (!rows.empty() && r.epoch <= rows.back().epoch) {
      parse_fail(path, line_no,
                 r.epoch == rows.back().epoch ? "duplicate epoch " + std::to_string(r.epoch)
                                              : "epochs must be strictly increasing");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_epoch_metrics(std::span<const EpochMetrics> rows, const fs::path& path) {
  std::string text = "epoch,phase,auc,accuracy\n";
  for (const auto& r : rows) {
    text += std::to_string(r.epoch) + "," + std::string(phase_name(r.phase)) + "," +
            format_double("%.4f", r.auc) + "," + format_double("%.4f", r.accuracy) + "\n";
  }
  write_text_file(path, text);
}

// ---------------------------------------------------------------------------
// Score report

std::optional<int> checkpoint_epoch(std::string_view checkpoint) {
  std::size_t end = checkpoint.size();
  std::size_t start = end;
  while (start > 0 && checkpoint[start - 1] >= '0' && checkpoint[start - 1] <= '9') --start;
  if (start == end) return std::nullopt;
  int v = 0;
  std::from_chars(checkpoint.data() + start, checkpoint.data() + end, v);
  return v;
}

std::vector<ScoreRow> rows_from_result(const std::string& checkpoint,
                                       const GlobalConsistencyResult& result) {
  std::vector<ScoreRow> rows;
  std::size_t total = 0;
  for (const auto& c : result.per_class) {
    ScoreRow r{checkpoint, c.method, c.class_id, c.cscore, c.gold_size, {}};
    if (c.empty_gold) r.flags.emplace_back("empty_gold");
    if (c.singleton_gold) r.flags.emplace_back("singleton_gold");
    if (c.degenerate_pairs > 0) {
      r.flags.push_back("degenerate_pairs=" + std::to_string(c.degenerate_pairs));
    }
    total += c.gold_size;
    rows.push_back(std::move(r));
  }
  ScoreRow g{checkpoint, result.method, std::nullopt, result.cscore, total, {}};
  if (result.all_empty) g.flags.emplace_back("all_empty");
  rows.push_back(std::move(g));
  return rows;
}

void sort_score_rows(std::vector<ScoreRow>& rows) {
  auto key = [](const ScoreRow& r) {
    const auto e = checkpoint_epoch(r.checkpoint);
    return std::tuple(e.has_value() ? 0 : 1, e.value_or(0), std::string_view(r.checkpoint),
                      r.method, r.class_id.has_value() ? 0 : 1, r.class_id.value_or(0));
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const ScoreRow& a, const ScoreRow& b) { return key(a) < key(b); });
}

std::string format_cscore_report(std::vector<ScoreRow> rows) {
  sort_score_rows(rows);
  std::string text = "checkpoint,method,class,cscore,cscore_full,gold_size,flags\n";
  for (const auto& r : rows) {
    if (r.checkpoint.find(',') != std::string::npos) {
      throw ValidationError("checkpoint id may not contain ',': " + r.checkpoint);
    }
    std::string flags;
    for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
    text += r.checkpoint + "," + std::string(method_name(r.method)) + "," +
            (r.class_id ? std::to_string(*r.class_id) : std::string("global")) + "," +
            format_double("%.3f", r.cscore) + "," + shortest(r.cscore) + "," +
            std::to_string(r.gold_size) + "," + flags + "\n";
  }
  return text;
}

void write_cscore_report(std::vector<ScoreRow> rows, const fs::path& path) {
  if (rows.empty()) throw ValidationError("write_cscore_report: no results to write");
  write_text_file(path, format_cscore_report(std::move(rows)));
}

std::vector<ScoreRow> read_cscore_report(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "checkpoint,method,class,cscore,cscore_full,gold_size,flags") {
    parse_fail(path, 1, "expected header 'checkpoint,method,class,cscore,cscore_full,gold_size,flags'");
  }
  std::vector<ScoreRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (lines[n].empty()) continue;
    const auto f = split(lines[n], ',');
    if (f.size() != 7) parse_fail(path, line_no, "expected 7 fields");
    ScoreRow r;
    r.checkpoint = std::string(f[0]);
    try {
      r.method = parse_method(f[1]);
    } catch (const ValidationError& e) {
      parse_fail(path, line_no, e.what());
    }
    if (f[2] != "global") r.class_id = parse_number<int>(f[2], path, line_no, "class");
    r.cscore = parse_number<double>(f[4], path, line_no, "cscore_full");
    if (!(r.cscore >= 0.0 && r.cscore <= 1.0)) parse_fail(path, line_no, "cscore outside [0, 1]");
    r.gold_size = parse_number<std::size_t>(f[5], path, line_no, "gold_size");
    if (!f[6].empty()) {
      for (auto flag : split(f[6], ';')) r.flags.emplace_back(flag);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

TrajectorySeries assemble_series(std::span<const EpochMetrics> metrics,
                                 std::span<const ScoreRow> scores, const PhaseConfig& phases) {
  std::map<int, CheckpointRecord> records;
  for (const ScoreRow& row : scores) {
    const auto epoch = checkpoint_epoch(row.checkpoint);
    if (!epoch) {
      throw ValidationError("checkpoint id '" + row.checkpoint + "' carries no epoch number");
    }
    auto [it, inserted] = records.try_emplace(*epoch);
    CheckpointRecord& rec = it->second;
    if (inserted) {
      const auto m = std::find_if(metrics.begin(), metrics.end(),
                                  [&](const EpochMetrics& e) { return e.epoch == *epoch; });
      if (m == metrics.end()) {
        throw ValidationError("no epoch metrics for checkpoint '" + row.checkpoint + "'");
      }
      if (m->phase != phase_of(*epoch, phases)) {
        throw ValidationError("epoch " + std::to_string(*epoch) + " is labelled " +
                              std::string(phase_name(m->phase)) +
                              " but the phase boundary is epoch " +
                              std::to_string(phases.boundary));
      }
      rec.epoch = *epoch;
      rec.phase = m->phase;
      rec.auc = m->auc;
      rec.accuracy = m->accuracy;
    }
    if (!row.class_id) {
      rec.global[row.method] = row.cscore;
      continue;
    }
    const int cls = *row.class_id;
    rec.per_class[{row.method, cls}] = {row.cscore, row.gold_size};
    const auto [g, fresh] = rec.gold_sizes.try_emplace(cls, row.gold_size);
    if (!fresh && g->second != row.gold_size) {
      throw ValidationError("inconsistent gold sizes for class " + std::to_string(cls) +
                            " at checkpoint '" + row.checkpoint + "'");
    }
  }
  std::vector<CheckpointRecord> out;
  for (auto& [epoch, rec] : records) {
    std::map<CamMethod, std::vector<ClassConsistencyResult>> by_method;
    for (const auto& [key, score] : rec.per_class) {
      ClassConsistencyResult c;
      c.method = key.first;
      c.class_id = key.second;
      c.cscore = score.cscore;
      c.gold_size = score.gold_size;
      by_method[key.first].push_back(c);
    }
    for (const auto& [method, classes] : by_method) {
      if (!rec.global.contains(method)) rec.global[method] = global_cscore(classes).cscore;
    }
    out.push_back(std::move(rec));
  }
  return TrajectorySeries(std::move(out));
}

// ---------------------------------------------------------------------------
// Alerts

std::string format_alerts_json(std::span<const Alert> alerts) {
  json arr = json::array();
  for (const Alert& a : alerts) {
    json j;
    j["kind"] = alert_kind_name(a.kind);
    j["epoch"] = a.epoch;
    j["method"] = a.method ? json(method_name(*a.method)) : json(nullptr);
    j["class"] = a.class_id ? json(*a.class_id) : json(nullptr);
    json ev = json::object();
    for (const auto& [k, v] : a.evidence) ev[k] = v;
    j["evidence"] = std::move(ev);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_alerts_json(std::span<const Alert> alerts, const fs::path& path) {
  write_text_file(path, format_alerts_json(alerts));
}

void RunConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ParameterError("tau must satisfy 0 < tau < 1, got " + format_double("%g", tau));
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("alpha must be > 0, got " + format_double("%g", alpha));
  }
  if (methods.empty()) throw ParameterError("at least one CAM method is required");
  if (phases.boundary < 0) throw ParameterError("phase boundary must be >= 0");
  if (!(thresholds.auc_floor >= 0.0 && thresholds.auc_floor <= 1.0)) {
    throw ParameterError("auc floor must be in [0, 1]");
  }
  if (!(thresholds.drop_ratio > 0.0 && thresholds.drop_ratio <= 1.0)) {
    throw ParameterError("drop ratio must be in (0, 1]");
  }
  if (!(thresholds.collapse_floor >= 0.0 && thresholds.collapse_floor <= 1.0)) {
    throw ParameterError("collapse floor must be in [0, 1]");
  }
  if (!(thresholds.gap_min >= 0.0 && thresholds.gap_min <= 1.0)) {
    throw ParameterError("class gap threshold must be in [0, 1]");
  }
  if (ms_size && ((*ms_size)[0] == 0 || (*ms_size)[1] == 0)) {
    throw ParameterError("multi-scale output size must be positive");
  }
}

}  // namespace cscore
