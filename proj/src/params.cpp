#include "fusionattack/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fusionattack/errors.hpp"

namespace fusion {

namespace {

constexpr double kMaxSpotCoordinate = 1 << 20;

double round_half_up(double x) { return std::floor(x + 0.5); }

bool is_integral(double x) { return std::isfinite(x) && std::floor(x) == x; }

bool is_odd_integral(double x) {
  return is_integral(x) && std::fmod(std::fabs(x), 2.0) == 1.0;
}

}  // namespace

std::string_view param_name(Param p) {
  switch (p) {
    case Param::kBlurSize: return "blur_size";
    case Param::kBlurSigma: return "blur_sigma";
    case Param::kJpegQuality: return "jpeg_quality";
    case Param::kNoiseVariance: return "noise_variance";
    case Param::kSpotX: return "spot_x";
    case Param::kSpotY: return "spot_y";
    case Param::kSpotGain: return "spot_gain";
    case Param::kSpotRadius: return "spot_radius";
  }
  return "?";
}

ParamVector PostProcParams::to_vector() const {
  return {static_cast<double>(blur_size), blur_sigma,        static_cast<double>(jpeg_quality),
          noise_variance,                 static_cast<double>(spot_x), static_cast<double>(spot_y),
          spot_gain,                      static_cast<double>(spot_radius)};
}

PostProcParams PostProcParams::from_vector(const ParamVector& v) {
  PostProcParams p;
  p.blur_size = static_cast<int>(v[0]);
  p.blur_sigma = v[1];
  p.jpeg_quality = static_cast<int>(v[2]);
  p.noise_variance = v[3];
  p.spot_x = static_cast<int>(v[4]);
  p.spot_y = static_cast<int>(v[5]);
  p.spot_gain = v[6];
  p.spot_radius = static_cast<int>(v[7]);
  return p;
}

ParamBounds ParamBounds::defaults() {
  ParamBounds b;
  b[Param::kBlurSize] = {1, 13, ParamKind::kOddInteger};
  b[Param::kBlurSigma] = {0.5, 5, ParamKind::kContinuous};
  b[Param::kJpegQuality] = {10, 100, ParamKind::kInteger};
  b[Param::kNoiseVariance] = {0.0001, (5.0 / 255.0) * (5.0 / 255.0), ParamKind::kContinuous};
  b[Param::kSpotX] = {0, kMaxSpotCoordinate, ParamKind::kInteger};
  b[Param::kSpotY] = {0, kMaxSpotCoordinate, ParamKind::kInteger};
  b[Param::kSpotGain] = {0.2, 1.8, ParamKind::kContinuous};
  b[Param::kSpotRadius] = {30, 100, ParamKind::kInteger};
  return b;
}

void ParamBounds::set(Param p, double lo, double hi) {
  auto& r = (*this)[p];
  r.lo = lo;
  r.hi = hi;
}

ParamBounds ParamBounds::fit_to(ImageDims dims) const {
  if (dims.width < 1 || dims.height < 1) {
    throw InvalidArgument("image dimensions must be positive");
  }
  ParamBounds out = *this;
  auto fit = [](ParamRange& r, int extent) {
    const double last = extent - 1;
    r.hi = std::min(r.hi, last);
    r.lo = std::min(r.lo, r.hi);
  };
  fit(out[Param::kSpotX], dims.width);
  fit(out[Param::kSpotY], dims.height);
  return out;
}

void ParamBounds::validate() const {
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto& r = ranges_[i];
    const std::string name{param_name(static_cast<Param>(i))};
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
      throw InvalidArgument("invalid bounds for " + name);
    }
    if (r.kind == ParamKind::kInteger && !(is_integral(r.lo) && is_integral(r.hi))) {
      throw InvalidArgument("bounds for " + name + " must be integers");
    }
    if (r.kind == ParamKind::kOddInteger && !(is_odd_integral(r.lo) && is_odd_integral(r.hi))) {
      throw InvalidArgument("bounds for " + name + " must be odd integers");
    }
  }
  const auto& b = *this;
  if (b[Param::kBlurSize].lo < 1) throw InvalidArgument("blur_size must be >= 1");
  if (b[Param::kBlurSigma].lo <= 0) throw InvalidArgument("blur_sigma must be > 0");
  if (b[Param::kJpegQuality].lo < 1 || b[Param::kJpegQuality].hi > 100) {
    throw InvalidArgument("jpeg_quality must lie in [1,100]");
  }
  if (b[Param::kNoiseVariance].lo < 0) throw InvalidArgument("noise_variance must be >= 0");
  if (b[Param::kSpotX].lo < 0 || b[Param::kSpotY].lo < 0) {
    throw InvalidArgument("spot center must be non-negative");
  }
  if (b[Param::kSpotGain].lo <= 0) throw InvalidArgument("spot_gain must be > 0");
  if (b[Param::kSpotRadius].lo < 1) throw InvalidArgument("spot_radius must be >= 1");
}

double snap_odd(double x) { return 2.0 * std::floor((x - 1.0) / 2.0 + 0.5) + 1.0; }

PostProcParams clamp_params(const ParamVector& raw, const ParamBounds& bounds, ImageDims dims) {
  const ParamBounds fitted = bounds.fit_to(dims);
  ParamVector v{};
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto& r = fitted[i];
    double x = std::isnan(raw[i]) ? r.lo : std::min(std::max(raw[i], r.lo), r.hi);
    switch (r.kind) {
      case ParamKind::kContinuous: break;
      case ParamKind::kInteger: x = round_half_up(x); break;
      case ParamKind::kOddInteger: x = snap_odd(x); break;
    }
    v[i] = x;
  }
  return PostProcParams::from_vector(v);
}

PostProcParams sample_params(const ParamBounds& bounds, ImageDims dims, Rng& rng) {
  const ParamBounds fitted = bounds.fit_to(dims);
  ParamVector raw{};
  for (std::size_t i = 0; i < kParamCount; ++i) {
    raw[i] = rng.uniform(fitted[i].lo, fitted[i].hi);
  }
  return clamp_params(raw, fitted, dims);
}

bool is_feasible(const PostProcParams& p, const ParamBounds& bounds, ImageDims dims) {
  const ParamBounds fitted = bounds.fit_to(dims);
  const ParamVector v = p.to_vector();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto& r = fitted[i];
    if (!(v[i] >= r.lo && v[i] <= r.hi)) return false;
    if (r.kind == ParamKind::kInteger && !is_integral(v[i])) return false;
    if (r.kind == ParamKind::kOddInteger && !is_odd_integral(v[i])) return false;
  }
  return p.spot_x < dims.width && p.spot_y < dims.height;
}

}  // namespace fusion
