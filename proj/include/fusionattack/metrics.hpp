#pragma once

#include "fusionattack/image.hpp"

namespace fusion {

struct SsimConfig {
  int window = 11;
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

// Mean single-scale SSIM on Rec. 601 luma over all valid (fully inside)
// window positions. Throws InvalidArgument on shape mismatch or when the
// image is smaller than the window.
double ssim(const Image& a, const Image& b, const SsimConfig& cfg = {});

// 10*log10(1/MSE) over all channels; +infinity when the images are equal.
double psnr(const Image& a, const Image& b);

}  // namespace fusion
