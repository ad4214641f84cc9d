#pragma once

#include <cstdint>
#include <vector>

#include "fusionattack/image.hpp"
#include "fusionattack/params.hpp"
#include "fusionattack/rng.hpp"

namespace fusion {

// Normalized 1-D Gaussian taps for an odd window of the given side length.
std::vector<double> gaussian_kernel(int size, double sigma);

// Maps an out-of-range index back into [0, n) by mirroring about the edge
// samples (no edge duplication), repeating as often as needed.
int reflect_index(int i, int n);

// Separable Gaussian blur with a size x size window, reflect padding.
Image gaussian_blur(const Image& img, int size, double sigma);

// 8-bit quantize, baseline JPEG encode at the given quality, decode.
Image jpeg_roundtrip(const Image& img, int quality);

// Adds i.i.d. N(0, variance) per pixel per channel, then clamps.
Image add_gaussian_noise(const Image& img, double variance, Rng& rng);

// Multiplicative radial gain 1 + (gain-1)*max(0, 1 - d/radius) around
// (cx, cy); gain > 1 brightens, gain < 1 darkens.
Image apply_light_spot(const Image& img, int cx, int cy, double gain, int radius);

// Blur -> JPEG -> noise -> light spot. The noise stage draws from a fresh
// stream seeded with noise_seed, so the result is a pure function of its
// arguments.
Image apply_fusion(const Image& img, const PostProcParams& p, std::uint64_t noise_seed);

}  // namespace fusion
