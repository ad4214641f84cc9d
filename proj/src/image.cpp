#include "fusionattack/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fusionattack/errors.hpp"

namespace fusion {

Image::Image(int width, int height, float fill) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
  width_ = width;
  height_ = height;
  data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
}

Image::Image(int width, int height, std::vector<float> data) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("image dimensions must be positive");
  }
  if (data.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw InvalidArgument("image buffer length does not match width*height*3");
  }
  width_ = width;
  height_ = height;
  data_ = std::move(data);
}

void Image::clamp() {
  for (float& v : data_) {
    v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  }
}

double Image::mean() const {
  if (data_.empty()) return 0.0;
  double sum = 0.0;
  for (float v : data_) sum += v;
  return sum / static_cast<double>(data_.size());
}

std::vector<double> luma(const Image& img) {
  std::vector<double> out(static_cast<std::size_t>(img.width()) * img.height());
  auto src = img.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
  }
  return out;
}

unsigned char to_byte(float v) {
  if (!(v > 0.0f)) return 0;
  if (v >= 1.0f) return 255;
  return static_cast<unsigned char>(std::floor(static_cast<double>(v) * 255.0 + 0.5));
}

Image quantize8(const Image& img) {
  Image out = img;
  for (float& v : out.data()) v = from_byte(to_byte(v));
  return out;
}

}  // namespace fusion
