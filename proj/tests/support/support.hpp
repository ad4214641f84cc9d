#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusionattack/image.hpp"
#include "fusionattack/params.hpp"
#include "fusionattack/synthetic.hpp"

namespace fusion::testing {

std::string data_path(const std::string& name);
Image load_fixture(const std::string& name);

// 224x224 crops of five photographs, and ten 64x64 crops of the same.
const std::vector<std::string>& natural_224();
const std::vector<std::string>& natural_64();

// Smooth gradient plus seeded texture; values strictly inside (0,1).
Image textured_image(int width, int height, std::uint64_t seed);

// Straightforward references, deliberately not sharing code paths with the
// library implementation.
double reference_ssim(const Image& a, const Image& b);
Image reference_blur(const Image& img, int size, double sigma);
double reference_snap_odd(double x);

// Exhaustive evaluation over a coarse lattice of the parameter box (spot
// center fixed at the image center, noise drawn with a fixed seed).
struct GridSearchResult {
  double min_score = 1.0;
  PostProcParams argmin;
  std::size_t points = 0;
  std::size_t below_threshold = 0;
};
GridSearchResult coarse_grid_search(const Image& img, const SyntheticDetectorSpec& spec,
                                    const ParamBounds& bounds);

// A composite synthetic detector fitted to one fixture: the original
// scores at least 0.6 and the coarse grid reaches 0.45 or lower.
struct SyntheticInstance {
  std::string fixture;
  Image image;
  SyntheticDetectorSpec spec;
  double original_score = 0.0;
  double grid_min_score = 1.0;
};
SyntheticInstance make_composite_instance(std::uint64_t seed);

}  // namespace fusion::testing
