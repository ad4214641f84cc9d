#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fusionattack/oracle.hpp"

namespace fusion {

// Hand-built detectors with closed-form scores. Each single-feature kind is
// a logistic curve over one image statistic:
//   highfreq    p = sigmoid(a * (E - t)), E = mean |4-neighbour Laplacian| of luma
//   noise-var   p = sigmoid(a * (t - V)), V = estimated noise std of luma
//   brightness  p = sigmoid(a * (B - t)), B = mean luma
// so blur/JPEG, added noise and darkening respectively lower the score.
// composite   p = sum_k w_k * p_k over single-feature components.
enum class SyntheticKind { kHighFreq, kNoiseVar, kBrightness, kComposite };

std::string_view to_string(SyntheticKind kind);
std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name);

struct SyntheticDetectorSpec {
  SyntheticKind kind = SyntheticKind::kHighFreq;
  double steepness = 10.0;
  double threshold = 0.1;
  std::vector<SyntheticDetectorSpec> components;  // composite only
  std::vector<double> weights;                    // composite only, sums to 1

  // Throws InvalidArgument when steepness <= 0, weights do not sum to one,
  // or a composite nests another composite.
  void validate() const;

  // Defaults tuned for natural photographs in [0,1].
  static SyntheticDetectorSpec defaults(SyntheticKind kind);
};

double highfreq_energy(const Image& img);
// Immerkaer's fast noise-std estimate on luma.
double noise_level(const Image& img);
double mean_brightness(const Image& img);

double sigmoid(double x);

class SyntheticDetector : public Oracle {
 public:
  explicit SyntheticDetector(SyntheticDetectorSpec spec);

  double fake_probability(const Image& img) override;
  std::string id() const override;
  bool concurrent_safe() const override { return true; }

  const SyntheticDetectorSpec& spec() const { return spec_; }

 private:
  SyntheticDetectorSpec spec_;
};

double evaluate_synthetic(const SyntheticDetectorSpec& spec, const Image& img);

}  // namespace fusion
