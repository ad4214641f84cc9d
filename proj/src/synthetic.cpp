#include "fusionattack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fusionattack/errors.hpp"

namespace fusion {

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kHighFreq: return "highfreq";
    case SyntheticKind::kNoiseVar: return "noise-var";
    case SyntheticKind::kBrightness: return "brightness";
    case SyntheticKind::kComposite: return "composite";
  }
  return "?";
}

std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name) {
  for (auto k : {SyntheticKind::kHighFreq, SyntheticKind::kNoiseVar, SyntheticKind::kBrightness,
                 SyntheticKind::kComposite}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void SyntheticDetectorSpec::validate() const {
  if (kind != SyntheticKind::kComposite) {
    if (!(steepness > 0.0) || !std::isfinite(steepness)) {
      throw InvalidArgument("synthetic detector steepness must be positive");
    }
    if (!std::isfinite(threshold)) throw InvalidArgument("synthetic detector threshold must be finite");
    return;
  }
  if (components.empty() || components.size() != weights.size()) {
    throw InvalidArgument("composite detector needs one weight per component");
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("composite weights must be non-negative");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-9) throw InvalidArgument("composite weights must sum to 1");
  for (const auto& c : components) {
    if (c.kind == SyntheticKind::kComposite) {
      throw InvalidArgument("composite detectors cannot be nested");
    }
    c.validate();
  }
}

SyntheticDetectorSpec SyntheticDetectorSpec::defaults(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kHighFreq: return {kind, 100.0, 0.05, {}, {}};
    case SyntheticKind::kNoiseVar: return {kind, 500.0, 0.018, {}, {}};
    case SyntheticKind::kBrightness: return {kind, 20.0, 0.35, {}, {}};
    case SyntheticKind::kComposite: {
      SyntheticDetectorSpec s{kind, 1.0, 0.0, {}, {}};
      s.components = {defaults(SyntheticKind::kHighFreq), defaults(SyntheticKind::kNoiseVar),
                      defaults(SyntheticKind::kBrightness)};
      s.weights = {0.4, 0.4, 0.2};
      return s;
    }
  }
  return {};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double highfreq_energy(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) return 0.0;
  const auto y = luma(img);
  auto at = [&](int xx, int yy) { return y[static_cast<std::size_t>(yy) * w + xx]; };
  double sum = 0.0;
  for (int yy = 1; yy < h - 1; ++yy) {
    for (int xx = 1; xx < w - 1; ++xx) {
      sum += std::fabs(4.0 * at(xx, yy) - at(xx - 1, yy) - at(xx + 1, yy) - at(xx, yy - 1) -
                       at(xx, yy + 1));
    }
  }
  return sum / (static_cast<double>(w - 2) * (h - 2));
}

double noise_level(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) return 0.0;
  const auto y = luma(img);
  auto at = [&](int xx, int yy) { return y[static_cast<std::size_t>(yy) * w + xx]; };
  double sum = 0.0;
  for (int yy = 1; yy < h - 1; ++yy) {
    for (int xx = 1; xx < w - 1; ++xx) {
      const double r = at(xx - 1, yy - 1) - 2.0 * at(xx, yy - 1) + at(xx + 1, yy - 1) -
                       2.0 * at(xx - 1, yy) + 4.0 * at(xx, yy) - 2.0 * at(xx + 1, yy) +
                       at(xx - 1, yy + 1) - 2.0 * at(xx, yy + 1) + at(xx + 1, yy + 1);
      sum += std::fabs(r);
    }
  }
  return std::sqrt(std::numbers::pi / 2.0) * sum / (6.0 * (w - 2) * (h - 2));
}

double mean_brightness(const Image& img) {
  const auto y = luma(img);
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double evaluate_synthetic(const SyntheticDetectorSpec& spec, const Image& img) {
  switch (spec.kind) {
    case SyntheticKind::kHighFreq:
      return sigmoid(spec.steepness * (highfreq_energy(img) - spec.threshold));
    case SyntheticKind::kNoiseVar:
      return sigmoid(spec.steepness * (spec.threshold - noise_level(img)));
    case SyntheticKind::kBrightness:
      return sigmoid(spec.steepness * (mean_brightness(img) - spec.threshold));
    case SyntheticKind::kComposite: {
      double p = 0.0;
      for (std::size_t i = 0; i < spec.components.size(); ++i) {
        p += spec.weights[i] * evaluate_synthetic(spec.components[i], img);
      }
      return std::min(p, 1.0);
    }
  }
  return 0.0;
}

SyntheticDetector::SyntheticDetector(SyntheticDetectorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

double SyntheticDetector::fake_probability(const Image& img) {
  return evaluate_synthetic(spec_, img);
}

std::string SyntheticDetector::id() const {
  return "synthetic:" + std::string(to_string(spec_.kind));
}

}  // namespace fusion
