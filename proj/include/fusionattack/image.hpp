#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fusion {

// Interleaved RGB image with float intensities in [0,1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, float fill = 0.0f);
  Image(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Clamps every value into [0,1]; NaN maps to 0.
  void clamp();

  double mean() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// Rec. 601 luma, row-major, one double per pixel.
std::vector<double> luma(const Image& img);

// 8-bit conversion used at every byte boundary (PNG, JPEG): round half up.
unsigned char to_byte(float v);
inline float from_byte(unsigned char b) { return static_cast<float>(b) / 255.0f; }

// Quantizes every value to the nearest representable 8-bit level.
Image quantize8(const Image& img);

}  // namespace fusion
