#include "fusionattack/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fusionattack/errors.hpp"
#include "fusionattack/ops.hpp"

namespace fusion {

namespace {

// Bilinear sample with reflected coordinates.
void sample_reflect(const Image& img, double x, double y, float* rgb) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const int xa = reflect_index(x0, img.width());
  const int xb = reflect_index(x0 + 1, img.width());
  const int ya = reflect_index(y0, img.height());
  const int yb = reflect_index(y0 + 1, img.height());
  for (int c = 0; c < Image::kChannels; ++c) {
    const double top = (1.0 - fx) * img.at(xa, ya, c) + fx * img.at(xb, ya, c);
    const double bottom = (1.0 - fx) * img.at(xa, yb, c) + fx * img.at(xb, yb, c);
    rgb[c] = static_cast<float>((1.0 - fy) * top + fy * bottom);
  }
}

}  // namespace

Image rotate(const Image& img, double degrees) {
  if (!std::isfinite(degrees)) throw InvalidArgument("rotation angle must be finite");
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = (img.width() - 1) / 2.0;
  const double cy = (img.height() - 1) / 2.0;
  Image out(img.width(), img.height());
  float rgb[Image::kChannels];
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      // inverse mapping: output pixel -> source coordinate
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = cx + cs * dx + sn * dy;
      const double sy = cy - sn * dx + cs * dy;
      sample_reflect(img, sx, sy, rgb);
      for (int c = 0; c < Image::kChannels; ++c) out.at(x, y, c) = rgb[c];
    }
  }
  out.clamp();
  return out;
}

Image resize(const Image& img, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("resize factor must be positive");
  }
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * factor)));
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * factor)));
  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;
  Image out(w, h);
  float rgb[Image::kChannels];
  for (int y = 0; y < h; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    for (int x = 0; x < w; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      sample_reflect(img, src_x, src_y, rgb);
      for (int c = 0; c < Image::kChannels; ++c) out.at(x, y, c) = rgb[c];
    }
  }
  out.clamp();
  return out;
}

}  // namespace fusion
