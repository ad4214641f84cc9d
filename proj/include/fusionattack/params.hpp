#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "fusionattack/rng.hpp"

namespace fusion {

// Dimension order of a particle position: blur window, blur sigma, JPEG
// quality, noise variance, spot x, spot y, spot gain, spot radius.
enum class Param : std::size_t {
  kBlurSize = 0,
  kBlurSigma,
  kJpegQuality,
  kNoiseVariance,
  kSpotX,
  kSpotY,
  kSpotGain,
  kSpotRadius,
};

inline constexpr std::size_t kParamCount = 8;
using ParamVector = std::array<double, kParamCount>;

enum class ParamKind { kContinuous, kInteger, kOddInteger };

std::string_view param_name(Param p);

struct ImageDims {
  int width = 0;
  int height = 0;
};

// Intensities of the four fused post-processing operators.
struct PostProcParams {
  int blur_size = 1;          // odd window side length, pixels
  double blur_sigma = 0.5;    // pixels
  int jpeg_quality = 100;     // 1..100
  double noise_variance = 0;  // squared intensity units
  int spot_x = 0;
  int spot_y = 0;
  double spot_gain = 1.0;     // gain at the spot center
  int spot_radius = 30;       // pixels

  ParamVector to_vector() const;
  // No coercion; use clamp_params for arbitrary reals.
  static PostProcParams from_vector(const ParamVector& v);

  friend bool operator==(const PostProcParams&, const PostProcParams&) = default;
};

struct ParamRange {
  double lo = 0;
  double hi = 0;
  ParamKind kind = ParamKind::kContinuous;

  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

class ParamBounds {
 public:
  // Defaults: blur window {1,3,...,13}, blur sigma [0.5,5], quality
  // {10..100}, noise variance [1e-4,(5/255)^2], spot gain [0.2,1.8],
  // spot radius {30..100}. Spot center spans the image once fitted.
  static ParamBounds defaults();

  ParamRange& operator[](Param p) { return ranges_[static_cast<std::size_t>(p)]; }
  const ParamRange& operator[](Param p) const { return ranges_[static_cast<std::size_t>(p)]; }
  const ParamRange& operator[](std::size_t i) const { return ranges_[i]; }

  void set(Param p, double lo, double hi);

  // Restricts the spot-center ranges to the pixel grid of the image.
  ParamBounds fit_to(ImageDims dims) const;

  // Throws InvalidArgument on inverted, non-finite or mis-typed bounds.
  void validate() const;

  friend bool operator==(const ParamBounds&, const ParamBounds&) = default;

 private:
  std::array<ParamRange, kParamCount> ranges_{};
};

// Nearest odd integer; ties go to the larger one.
double snap_odd(double x);

// Componentwise box clamp, then integer rounding and odd snapping.
// Idempotent, and the identity on feasible points.
PostProcParams clamp_params(const ParamVector& raw, const ParamBounds& bounds, ImageDims dims);

PostProcParams sample_params(const ParamBounds& bounds, ImageDims dims, Rng& rng);

bool is_feasible(const PostProcParams& p, const ParamBounds& bounds, ImageDims dims);

}  // namespace fusion
