#include "fusionattack/ops.hpp"

#include <cmath>
#include <string>

#include "fusionattack/codec.hpp"
#include "fusionattack/errors.hpp"

namespace fusion {

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0) {
    throw InvalidArgument("blur window must be a positive odd integer, got " +
                          std::to_string(size));
  }
  if (!(sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
  const int radius = size / 2;
  std::vector<double> taps(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Image gaussian_blur(const Image& img, int size, double sigma) {
  const auto taps = gaussian_kernel(size, sigma);
  if (size == 1) return img;
  const int radius = size / 2;
  const int w = img.width();
  const int h = img.height();
  constexpr int C = Image::kChannels;

  Image tmp(w, h);
  std::vector<int> xs(static_cast<std::size_t>(w + 2 * radius));
  for (int x = -radius; x < w + radius; ++x) xs[x + radius] = reflect_index(x, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int k = 0; k < size; ++k) acc += taps[k] * img.at(xs[x + k], y, c);
        tmp.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }

  Image out(w, h);
  std::vector<int> ys(static_cast<std::size_t>(h + 2 * radius));
  for (int y = -radius; y < h + radius; ++y) ys[y + radius] = reflect_index(y, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int k = 0; k < size; ++k) acc += taps[k] * tmp.at(x, ys[y + k], c);
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  out.clamp();
  return out;
}

Image jpeg_roundtrip(const Image& img, int quality) {
  return decode_jpeg(encode_jpeg(img, quality));
}

Image add_gaussian_noise(const Image& img, double variance, Rng& rng) {
  if (!(variance >= 0.0)) throw InvalidArgument("noise variance must be non-negative");
  if (variance == 0.0) return img;
  const double stddev = std::sqrt(variance);
  Image out = img;
  for (float& v : out.data()) v = static_cast<float>(v + stddev * rng.normal());
  out.clamp();
  return out;
}

Image apply_light_spot(const Image& img, int cx, int cy, double gain, int radius) {
  if (cx < 0 || cx >= img.width() || cy < 0 || cy >= img.height()) {
    throw InvalidArgument("light spot center lies outside the image");
  }
  if (!(gain > 0.0)) throw InvalidArgument("light spot gain must be positive");
  if (radius < 1) throw InvalidArgument("light spot radius must be >= 1");
  if (gain == 1.0) return img;

  Image out = img;
  const double r = radius;
  const int y0 = std::max(0, cy - radius);
  const int y1 = std::min(img.height() - 1, cy + radius);
  const int x0 = std::max(0, cx - radius);
  const int x1 = std::min(img.width() - 1, cx + radius);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(static_cast<double>(x - cx), static_cast<double>(y - cy));
      const double falloff = 1.0 - d / r;
      if (falloff <= 0.0) continue;
      const double g = 1.0 + (gain - 1.0) * falloff;
      for (int c = 0; c < Image::kChannels; ++c) {
        out.at(x, y, c) = static_cast<float>(out.at(x, y, c) * g);
      }
    }
  }
  out.clamp();
  return out;
}

Image apply_fusion(const Image& img, const PostProcParams& p, std::uint64_t noise_seed) {
  Image out = gaussian_blur(img, p.blur_size, p.blur_sigma);
  out = jpeg_roundtrip(out, p.jpeg_quality);
  Rng rng(noise_seed);
  out = add_gaussian_noise(out, p.noise_variance, rng);
  return apply_light_spot(out, p.spot_x, p.spot_y, p.spot_gain, p.spot_radius);
}

}  // namespace fusion
