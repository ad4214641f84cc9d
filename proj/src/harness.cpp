#include "fusionattack/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>

#include "fusionattack/codec.hpp"
#include "fusionattack/errors.hpp"
#include "fusionattack/ops.hpp"
#include "fusionattack/transforms.hpp"

namespace fusion {

std::string_view to_string(FusionOp op) {
  switch (op) {
    case FusionOp::kBlur: return "GB";
    case FusionOp::kJpeg: return "JPEG";
    case FusionOp::kNoise: return "GN";
    case FusionOp::kSpot: return "LS";
  }
  return "?";
}

std::optional<FusionOp> parse_fusion_op(std::string_view name) {
  for (auto op : {FusionOp::kBlur, FusionOp::kJpeg, FusionOp::kNoise, FusionOp::kSpot}) {
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

std::string AblationMode::to_string() const {
  switch (kind) {
    case Kind::kFull: return "full";
    case Kind::kRandomBaseline: return "random";
    case Kind::kOnlyOne: return "only:" + std::string(fusion::to_string(op));
    case Kind::kLeaveOneOut: return "without:" + std::string(fusion::to_string(op));
  }
  return "?";
}

AblationMode AblationMode::parse(std::string_view text) {
  if (text == "full") return full();
  if (text == "random") return random_baseline();
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto head = text.substr(0, colon);
    const auto op = parse_fusion_op(text.substr(colon + 1));
    if (op && head == "only") return only(*op);
    if (op && head == "without") return without(*op);
  }
  throw InvalidArgument("unknown mode '" + std::string(text) +
                        "' (expected full, random, only:<GB|JPEG|GN|LS>, without:<...>)");
}

ParamBounds freeze_op(ParamBounds bounds, FusionOp op) {
  switch (op) {
    case FusionOp::kBlur: bounds.set(Param::kBlurSize, 1, 1); break;
    case FusionOp::kJpeg: bounds.set(Param::kJpegQuality, 100, 100); break;
    case FusionOp::kNoise: bounds.set(Param::kNoiseVariance, 0, 0); break;
    case FusionOp::kSpot: bounds.set(Param::kSpotGain, 1, 1); break;
  }
  return bounds;
}

ParamBounds apply_ablation(ParamBounds bounds, const AblationMode& mode) {
  switch (mode.kind) {
    case AblationMode::Kind::kFull:
    case AblationMode::Kind::kRandomBaseline: return bounds;
    case AblationMode::Kind::kLeaveOneOut: return freeze_op(bounds, mode.op);
    case AblationMode::Kind::kOnlyOne:
      for (auto op : {FusionOp::kBlur, FusionOp::kJpeg, FusionOp::kNoise, FusionOp::kSpot}) {
        if (op != mode.op) bounds = freeze_op(bounds, op);
      }
      return bounds;
  }
  return bounds;
}

std::uint64_t image_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, Stream::kImage, index);
}

namespace {

std::string run_id(std::size_t index, const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  if (stem.empty()) stem = "image";
  std::string idx = std::to_string(index);
  idx.insert(0, idx.size() < 4 ? 4 - idx.size() : 0, '0');
  return "run_" + idx + "_" + stem;
}

}  // namespace

namespace {

// Appends a record (or a skip diagnostic) to result. Returns false when the
// oracle failed and the batch must stop.
bool attack_one(const NamedImage& item, std::size_t index, Oracle& oracle, const PsoConfig& cfg,
                const AblationMode& mode, BatchResult& result) {
  PsoConfig run_cfg = cfg;
  run_cfg.seed = image_seed(cfg.seed, index);
  run_cfg.bounds = apply_ablation(cfg.bounds, mode);

  RunRecord rec;
  rec.id = run_id(index, item.path);
  rec.input_path = item.path;
  rec.detector_id = oracle.id();
  rec.config = run_cfg;
  rec.mode = mode;
  const auto start = std::chrono::steady_clock::now();
  try {
    rec.outcome = mode.kind == AblationMode::Kind::kRandomBaseline
                      ? run_random_search(item.image, oracle, run_cfg)
                      : run_attack(item.image, oracle, run_cfg);
  } catch (const ProtocolError& e) {
    result.oracle_failure = item.path + ": " + e.what();
    return false;
  } catch (const TransportError& e) {
    result.oracle_failure = item.path + ": " + e.what();
    return false;
  } catch (const InvalidArgument& e) {
    result.skipped.push_back(item.path + ": " + e.what());
    std::clog << "skipping " << item.path << ": " << e.what() << "\n";
    return true;
  }
  rec.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.records.push_back(std::move(rec));
  return true;
}

}  // namespace

BatchResult attack_batch(std::span<const NamedImage> images, Oracle& oracle, const PsoConfig& cfg,
                         const AblationMode& mode) {
  cfg.validate();
  BatchResult result;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!attack_one(images[i], i, oracle, cfg, mode, result)) break;
  }
  return result;
}

BatchResult attack_batch(std::span<const std::filesystem::path> paths, Oracle& oracle,
                         const PsoConfig& cfg, const AblationMode& mode) {
  cfg.validate();
  BatchResult result;
  // Seeds follow the position in the input list, so a skipped file never
  // shifts the seeds of the images after it.
  for (std::size_t i = 0; i < paths.size(); ++i) {
    NamedImage item{paths[i].string(), {}};
    try {
      item.image = read_png(paths[i]);
    } catch (const Error& e) {
      result.skipped.push_back(item.path + ": " + e.what());
      std::clog << "skipping " << item.path << ": " << e.what() << "\n";
      continue;
    }
    if (!attack_one(item, i, oracle, cfg, mode, result)) break;
  }
  return result;
}

std::vector<std::filesystem::path> collect_inputs(const std::filesystem::path& input) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(input)) return {input};
  if (!fs::is_directory(input)) throw IoError("input not found: " + input.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double compute_asr(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("ASR of an empty score list is undefined");
  const auto hits = std::count_if(scores.begin(), scores.end(),
                                  [](double s) { return s < kDecisionThreshold; });
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kJpeg: return "jpeg";
    case TransformKind::kGaussianNoise: return "gaussian-noise";
    case TransformKind::kRotation: return "rotation";
    case TransformKind::kResize: return "resize";
  }
  return "?";
}

std::optional<TransformKind> parse_transform_kind(std::string_view name) {
  for (auto k : {TransformKind::kJpeg, TransformKind::kGaussianNoise, TransformKind::kRotation,
                 TransformKind::kResize}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

RobustnessSpec RobustnessSpec::published_grid(TransformKind kind) {
  switch (kind) {
    case TransformKind::kJpeg: return {kind, {50, 60, 70, 80, 90}};
    case TransformKind::kGaussianNoise: return {kind, {1, 2, 3, 4, 5}};
    case TransformKind::kRotation: return {kind, {2, 4, 6, 8, 10}};
    case TransformKind::kResize: return {kind, {0.5, 0.75, 1.25, 1.5, 1.75}};
  }
  return {};
}

std::vector<RobustnessSpec> RobustnessSpec::published_grids() {
  return {published_grid(TransformKind::kJpeg), published_grid(TransformKind::kGaussianNoise),
          published_grid(TransformKind::kRotation), published_grid(TransformKind::kResize)};
}

void RobustnessSpec::validate(bool published_only) const {
  if (levels.empty()) throw InvalidArgument("robustness spec needs at least one level");
  for (double l : levels) {
    if (!std::isfinite(l)) throw InvalidArgument("robustness levels must be finite");
    switch (kind) {
      case TransformKind::kJpeg:
        if (l < 1 || l > 100 || l != std::floor(l)) throw InvalidArgument("JPEG levels must be integers in [1,100]");
        break;
      case TransformKind::kGaussianNoise:
        if (l < 0) throw InvalidArgument("noise levels must be non-negative");
        break;
      case TransformKind::kResize:
        if (l <= 0) throw InvalidArgument("resize factors must be positive");
        break;
      case TransformKind::kRotation: break;
    }
  }
  if (published_only) {
    const auto grid = published_grid(kind).levels;
    for (double l : levels) {
      if (std::find(grid.begin(), grid.end(), l) == grid.end()) {
        throw InvalidArgument("level " + std::to_string(l) + " is not on the published " +
                              std::string(to_string(kind)) + " grid");
      }
    }
  }
}

Image apply_transform(const Image& img, TransformKind kind, double level, std::uint64_t seed) {
  switch (kind) {
    case TransformKind::kJpeg: return jpeg_roundtrip(img, static_cast<int>(level));
    case TransformKind::kGaussianNoise: {
      Rng rng(seed);
      const double stddev = level / 255.0;
      return add_gaussian_noise(img, stddev * stddev, rng);
    }
    case TransformKind::kRotation: return rotate(img, level);
    case TransformKind::kResize: return resize(img, level);
  }
  return img;
}

RobustnessRow evaluate_robustness(std::span<const RunRecord> records, Oracle& oracle,
                                  const RobustnessSpec& spec, const RobustnessOptions& opts) {
  spec.validate(false);
  std::vector<const RunRecord*> selected;
  for (const auto& r : records) {
    if (!opts.successful_only || r.outcome.success) selected.push_back(&r);
  }

  RobustnessRow row;
  row.kind = spec.kind;
  row.levels = spec.levels;
  row.images = selected.size();
  QueryLedger ledger(selected.size() * spec.levels.size());
  for (std::size_t li = 0; li < spec.levels.size(); ++li) {
    std::vector<double> scores;
    std::string error;
    for (std::size_t ri = 0; ri < selected.size() && error.empty(); ++ri) {
      const auto seed = derive_seed(opts.seed, Stream::kRobustness, ri, li);
      try {
        const Image t = apply_transform(selected[ri]->outcome.adversarial_image, spec.kind,
                                        spec.levels[li], seed);
        scores.push_back(score(oracle, t, ledger).fake_probability);
      } catch (const Error& e) {
        error = selected[ri]->id + ": " + e.what();
      }
    }
    if (error.empty() && !scores.empty()) {
      row.asr.push_back(compute_asr(scores));
      row.errors.emplace_back();
    } else {
      row.asr.push_back(std::nullopt);
      row.errors.push_back(error.empty() ? "no images" : error);
    }
  }
  row.queries = ledger.used();

  double sum = 0.0;
  std::size_t valid = 0;
  for (const auto& a : row.asr) {
    if (a) {
      sum += *a;
      ++valid;
    }
  }
  if (valid > 0) row.average = sum / static_cast<double>(valid);
  return row;
}

}  // namespace fusion
