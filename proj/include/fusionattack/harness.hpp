#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusionattack/image.hpp"
#include "fusionattack/oracle.hpp"
#include "fusionattack/pso.hpp"

namespace fusion {

enum class FusionOp { kBlur, kJpeg, kNoise, kSpot };

std::string_view to_string(FusionOp op);  // GB, JPEG, GN, LS
std::optional<FusionOp> parse_fusion_op(std::string_view name);

struct AblationMode {
  enum class Kind { kFull, kRandomBaseline, kOnlyOne, kLeaveOneOut };
  Kind kind = Kind::kFull;
  FusionOp op = FusionOp::kBlur;  // only-one / leave-one-out

  static AblationMode full() { return {}; }
  static AblationMode random_baseline() { return {Kind::kRandomBaseline, FusionOp::kBlur}; }
  static AblationMode only(FusionOp op) { return {Kind::kOnlyOne, op}; }
  static AblationMode without(FusionOp op) { return {Kind::kLeaveOneOut, op}; }

  // "full", "random", "only:<op>", "without:<op>"
  std::string to_string() const;
  static AblationMode parse(std::string_view text);

  friend bool operator==(const AblationMode&, const AblationMode&) = default;
};

// Pins the operator's parameters to its identity setting: blur window 1,
// JPEG quality 100, noise variance 0, spot gain 1.
ParamBounds freeze_op(ParamBounds bounds, FusionOp op);
ParamBounds apply_ablation(ParamBounds bounds, const AblationMode& mode);

struct RunRecord {
  std::string id;
  std::string input_path;
  std::string detector_id;
  PsoConfig config;  // effective config, including the per-image seed
  AblationMode mode;
  AttackOutcome outcome;
  double wall_clock_ms = 0.0;
};

struct NamedImage {
  std::string path;
  Image image;
};

struct BatchResult {
  std::vector<RunRecord> records;
  std::vector<std::string> skipped;  // "path: reason"
  std::optional<std::string> oracle_failure;
};

// Per-image seed, derived from the master seed and the image's index in
// the batch.
std::uint64_t image_seed(std::uint64_t master, std::size_t index);

// Runs one attack per image. Protocol and transport errors stop the batch;
// records completed so far are returned with oracle_failure set.
BatchResult attack_batch(std::span<const NamedImage> images, Oracle& oracle, const PsoConfig& cfg,
                         const AblationMode& mode);

// Reads PNG inputs first; unreadable files are skipped with a diagnostic.
BatchResult attack_batch(std::span<const std::filesystem::path> paths, Oracle& oracle,
                         const PsoConfig& cfg, const AblationMode& mode);

// Expands a file or a directory (PNG files, sorted by name).
std::vector<std::filesystem::path> collect_inputs(const std::filesystem::path& input);

// Fraction of scores strictly below the decision threshold.
double compute_asr(std::span<const double> scores);

enum class TransformKind { kJpeg, kGaussianNoise, kRotation, kResize };

std::string_view to_string(TransformKind kind);
std::optional<TransformKind> parse_transform_kind(std::string_view name);

// Levels: JPEG quality, noise std in 1/255 units, rotation degrees,
// resize factor.
struct RobustnessSpec {
  TransformKind kind = TransformKind::kJpeg;
  std::vector<double> levels;

  static RobustnessSpec published_grid(TransformKind kind);
  static std::vector<RobustnessSpec> published_grids();

  // published_only restricts levels to the published grid.
  void validate(bool published_only) const;
};

Image apply_transform(const Image& img, TransformKind kind, double level, std::uint64_t seed);

struct RobustnessOptions {
  bool successful_only = false;
  std::uint64_t seed = 0;
};

struct RobustnessRow {
  TransformKind kind = TransformKind::kJpeg;
  std::vector<double> levels;
  std::vector<std::optional<double>> asr;  // nullopt: cell invalid
  std::vector<std::string> errors;         // per invalid cell
  std::optional<double> average;           // mean of valid cells
  std::size_t images = 0;
  std::size_t queries = 0;
};

// Re-scores every selected adversarial image once per level against its
// own ledger; records are not modified.
RobustnessRow evaluate_robustness(std::span<const RunRecord> records, Oracle& oracle,
                                  const RobustnessSpec& spec, const RobustnessOptions& opts = {});

}  // namespace fusion
