#include "support.hpp"

#include <cmath>
#include <stdexcept>

#include "fusionattack/codec.hpp"
#include "fusionattack/ops.hpp"
#include "fusionattack/rng.hpp"

#ifndef FUSION_TEST_DATA_DIR
#error "FUSION_TEST_DATA_DIR must be defined"
#endif

namespace fusion::testing {

std::string data_path(const std::string& name) { return std::string(FUSION_TEST_DATA_DIR) + "/" + name; }

Image load_fixture(const std::string& name) { return read_png(data_path(name)); }

const std::vector<std::string>& natural_224() {
  static const std::vector<std::string> names = {
      "natural_astronaut_224.png", "natural_chelsea_224.png", "natural_coffee_224.png",
      "natural_rocket_224.png", "natural_ihc_224.png"};
  return names;
}

const std::vector<std::string>& natural_64() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const char* n : {"astronaut", "chelsea", "coffee", "rocket", "ihc"}) {
      out.push_back(std::string("natural_") + n + "_64a.png");
      out.push_back(std::string("natural_") + n + "_64b.png");
    }
    return out;
  }();
  return names;
}

Image textured_image(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  Image img(width, height);
  const double fx = rng.uniform(0.05, 0.3);
  const double fy = rng.uniform(0.05, 0.3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double base = 0.3 + 0.2 * x / width + 0.1 * c + 0.1 * std::sin(fx * x + fy * y + c);
        img.at(x, y, c) = static_cast<float>(std::clamp(base + 0.05 * rng.normal(), 0.02, 0.98));
      }
    }
  }
  return img;
}

double reference_ssim(const Image& a, const Image& b) {
  const int n = 11;
  const double sigma = 1.5;
  double w[n][n];
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * sigma * sigma));
      total += w[i][j];
    }
  }
  for (auto& row : w) {
    for (double& v : row) v /= total;
  }
  auto lum = [](const Image& im, int x, int y) {
    return 0.299 * im.at(x, y, 0) + 0.587 * im.at(x, y, 1) + 0.114 * im.at(x, y, 2);
  };
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y + n <= a.height(); ++y) {
    for (int x = 0; x + n <= a.width(); ++x) {
      double ma = 0, mb = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          ma += w[i][j] * lum(a, x + j, y + i);
          mb += w[i][j] * lum(b, x + j, y + i);
        }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double da = lum(a, x + j, y + i) - ma;
          const double db = lum(b, x + j, y + i) - mb;
          va += w[i][j] * da * da;
          vb += w[i][j] * db * db;
          cov += w[i][j] * da * db;
        }
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return sum / count;
}

Image reference_blur(const Image& img, int size, double sigma) {
  // Full 2-D kernel, mirrored coordinates computed by repeated folding.
  const int r = size / 2;
  std::vector<double> k2(static_cast<std::size_t>(size * size));
  double total = 0.0;
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j) {
      const double v = std::exp(-(i * i + j * j) / (2 * sigma * sigma));
      k2[(i + r) * size + (j + r)] = v;
      total += v;
    }
  auto fold = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
  };
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i)
          for (int j = -r; j <= r; ++j)
            acc += k2[(i + r) * size + (j + r)] / total *
                   img.at(fold(x + j, img.width()), fold(y + i, img.height()), c);
        out.at(x, y, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
  return out;
}

double reference_snap_odd(double x) {
  // Scan odd integers around x; keep the closest, preferring the larger on ties.
  double best = 1.0;
  double best_dist = 1e300;
  for (long k = static_cast<long>(std::floor(x)) - 3; k <= static_cast<long>(std::ceil(x)) + 3; ++k) {
    if (k % 2 == 0) continue;
    const double d = std::fabs(x - static_cast<double>(k));
    if (d < best_dist || (d == best_dist && k > best)) {
      best = static_cast<double>(k);
      best_dist = d;
    }
  }
  return best;
}

GridSearchResult coarse_grid_search(const Image& img, const SyntheticDetectorSpec& spec,
                                    const ParamBounds& bounds) {
  const ParamBounds b = bounds.fit_to({img.width(), img.height()});
  auto levels = [&](Param p, int count) {
    const auto& r = b[p];
    std::vector<double> out;
    if (r.lo == r.hi || count == 1) return std::vector<double>{r.lo};
    for (int i = 0; i < count; ++i) out.push_back(r.lo + (r.hi - r.lo) * i / (count - 1));
    return out;
  };
  GridSearchResult result;
  const int cx = img.width() / 2;
  const int cy = img.height() / 2;
  for (double a : levels(Param::kBlurSize, 3))
    for (double be : levels(Param::kBlurSigma, 3))
      for (double q : levels(Param::kJpegQuality, 2))
        for (double s : levels(Param::kNoiseVariance, 2))
          for (double th : levels(Param::kSpotGain, 3))
            for (double g : levels(Param::kSpotRadius, 3)) {
              PostProcParams p;
              p.blur_size = static_cast<int>(reference_snap_odd(a));
              p.blur_sigma = be;
              p.jpeg_quality = static_cast<int>(std::lround(q));
              p.noise_variance = s;
              p.spot_x = std::clamp(cx, static_cast<int>(b[Param::kSpotX].lo), static_cast<int>(b[Param::kSpotX].hi));
              p.spot_y = std::clamp(cy, static_cast<int>(b[Param::kSpotY].lo), static_cast<int>(b[Param::kSpotY].hi));
              p.spot_gain = th;
              p.spot_radius = static_cast<int>(std::lround(g));
              const double score = evaluate_synthetic(spec, apply_fusion(img, p, 12345));
              ++result.points;
              if (score < 0.5) ++result.below_threshold;
              if (score < result.min_score) {
                result.min_score = score;
                result.argmin = p;
              }
            }
  return result;
}

SyntheticInstance make_composite_instance(std::uint64_t seed) {
  SyntheticInstance inst;
  const auto& names = natural_64();
  inst.fixture = names[seed % names.size()];
  inst.image = load_fixture(inst.fixture);
  const double e0 = highfreq_energy(inst.image);
  const double b0 = mean_brightness(inst.image);
  const double v0 = noise_level(inst.image);
  // Thresholds sit between the clean statistic and what the strongest
  // post-processing reaches, so instances are flagged but attackable.
  constexpr int kMaxAttempts = 64;
  for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {0xC0FFEEULL, attempt}));
    SyntheticDetectorSpec hf{SyntheticKind::kHighFreq, 0, 0, {}, {}};
    hf.threshold = e0 * rng.uniform(0.17, 0.22);
    hf.steepness = 6.0 / hf.threshold;
    SyntheticDetectorSpec br{SyntheticKind::kBrightness, 0, 0, {}, {}};
    br.threshold = b0 * rng.uniform(0.52, 0.6);
    br.steepness = 6.0 / br.threshold;
    SyntheticDetectorSpec nv{SyntheticKind::kNoiseVar, 0, 0, {}, {}};
    nv.threshold = std::max(v0, 0.004);
    nv.steepness = 6.0 / nv.threshold;
    const double w_hf = rng.uniform(0.35, 0.45);
    const double w_br = rng.uniform(0.35, 0.45);
    inst.spec = {SyntheticKind::kComposite, 1.0, 0.0, {hf, br, nv}, {w_hf, w_br, 1.0 - w_hf - w_br}};
    inst.spec.validate();
    inst.original_score = evaluate_synthetic(inst.spec, inst.image);
    if (inst.original_score < 0.6) continue;
    inst.grid_min_score = coarse_grid_search(inst.image, inst.spec, ParamBounds::defaults()).min_score;
    if (inst.grid_min_score <= 0.45) return inst;
  }
  throw std::runtime_error("no composite instance for seed " + std::to_string(seed));
}

}  // namespace fusion::testing
