// One line per acceptance criterion: "PASS name: detail" or "FAIL ...".
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fusionattack/codec.hpp"
#include "fusionattack/harness.hpp"
#include "fusionattack/metrics.hpp"
#include "fusionattack/ops.hpp"
#include "fusionattack/pso.hpp"
#include "fusionattack/records.hpp"
#include "fusionattack/synthetic.hpp"
#include "support.hpp"

using namespace fusion;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kSuiteSize = 50;
constexpr double kMinAsr = 0.95;
constexpr double kMaxSuiteSeconds = 120.0;
constexpr double kInertiaTol = 1e-12;
constexpr int kFeasibilityCycles = 10000;
constexpr double kSsimSelfTol = 1e-9;
constexpr double kMinPsnr95 = 30.0;
constexpr double kAvgTol = 1e-12;

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class ConstantOracle : public Oracle {
 public:
  explicit ConstantOracle(double p) : p_(p) {}
  double fake_probability(const Image&) override { return p_; }
  std::string id() const override { return "constant"; }

 private:
  double p_;
};

struct SuiteRun {
  testing::SyntheticInstance instance;
  PsoConfig cfg;
  AttackOutcome pso;
  AttackOutcome random;
};

// Personal bests rebuilt from the evaluation log: first strict minimum per
// particle, in log order.
struct LoggedBest {
  double fitness = 2.0;
  PostProcParams position;
  std::uint64_t seed = 0;
};

std::vector<LoggedBest> personal_bests(const AttackOutcome& out, std::size_t n) {
  std::vector<LoggedBest> best(n);
  for (const auto& e : out.evaluations) {
    if (e.fitness < best[e.particle].fitness) best[e.particle] = {e.fitness, e.position, e.noise_seed};
  }
  return best;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> outcome_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "timings.csv") continue;
    out[rel] = slurp(e.path());
  }
  return out;
}

}  // namespace

int main() {
  // -- synthetic suite ----------------------------------------------------
  std::vector<SuiteRun> suite;
  std::size_t verified = 0;
  for (std::size_t i = 0; i < kSuiteSize; ++i) {
    SuiteRun run;
    run.instance = testing::make_composite_instance(i);
    if (run.instance.grid_min_score < 0.5 && run.instance.original_score >= 0.5) ++verified;
    run.cfg.seed = 1000 + i;
    suite.push_back(std::move(run));
  }

  const auto t0 = std::chrono::steady_clock::now();
  for (auto& run : suite) {
    SyntheticDetector d(run.instance.spec);
    run.pso = run_attack(run.instance.image, d, run.cfg);
  }
  const double pso_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& run : suite) {
    SyntheticDetector d(run.instance.spec);
    run.random = run_random_search(run.instance.image, d, run.cfg);
  }

  std::size_t pso_ok = 0, rnd_ok = 0;
  double pso_q = 0, rnd_q = 0;
  for (const auto& run : suite) {
    if (run.pso.success) {
      ++pso_ok;
      pso_q += static_cast<double>(*run.pso.queries_to_success);
    }
    if (run.random.success) {
      ++rnd_ok;
      rnd_q += static_cast<double>(*run.random.queries_to_success);
    }
  }
  const double pso_asr = static_cast<double>(pso_ok) / kSuiteSize;
  const double rnd_asr = static_cast<double>(rnd_ok) / kSuiteSize;
  const double pso_mean_q = pso_ok ? pso_q / pso_ok : INFINITY;
  const double rnd_mean_q = rnd_ok ? rnd_q / rnd_ok : INFINITY;

  verdict(verified == kSuiteSize && pso_asr >= kMinAsr && pso_seconds < kMaxSuiteSeconds,
          "synthetic_attack_success",
          fmt("%zu/%zu instances grid-verified, ASR %.2f (need >= %.2f), %.1f s (limit %.0f s)", verified,
              kSuiteSize, pso_asr, kMinAsr, pso_seconds, kMaxSuiteSeconds));

  verdict(pso_asr > rnd_asr && pso_mean_q < rnd_mean_q, "optimization_beats_random",
          fmt("ASR %.2f vs random %.2f; mean queries-to-success %.1f vs random %.1f", pso_asr, rnd_asr,
              pso_mean_q, rnd_mean_q));

  // -- query accounting -----------------------------------------------------
  {
    bool ok = true;
    for (const auto& run : suite) {
      ok = ok && run.pso.queries_used == run.cfg.particles * run.pso.iterations_run &&
           run.pso.queries_used <= run.cfg.budget && run.pso.evaluations.size() == run.pso.queries_used;
    }
    ConstantOracle fooled(0.1);
    const auto instant = run_attack(suite[0].instance.image, fooled, PsoConfig{});
    PsoConfig tight;
    tight.budget = 450;
    ConstantOracle stubborn(0.9);
    const auto capped = run_attack(suite[0].instance.image, stubborn, tight);
    ok = ok && instant.queries_used == 100 && instant.iterations_run == 1 && capped.queries_used == 400 &&
         capped.iterations_run == 4;
    verdict(ok, "query_accounting",
            fmt("queries = N x iterations on all %zu runs; constant 0.1 -> %zu queries; budget 450 -> %zu",
                suite.size(), instant.queries_used, capped.queries_used));
  }

  // -- selection correctness ----------------------------------------------
  {
    std::size_t checked = 0, mismatches = 0;
    auto check_run = [&](const Image& img, const AttackOutcome& out, std::size_t n) {
      if (!out.success) return;
      const auto bests = personal_bests(out, n);
      std::size_t successful = 0;
      double max_ssim = -2.0;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(bests[i].fitness < 0.5)) continue;
        ++successful;
        const double s = ssim(img, apply_fusion(img, bests[i].position, bests[i].seed));
        if (s > max_ssim) {
          max_ssim = s;
          arg = i;
        }
      }
      if (successful < 3) return;
      ++checked;
      if (out.ssim_to_original != max_ssim || out.selected_particle != arg) ++mismatches;
    };
    for (const auto& run : suite) check_run(run.instance.image, run.pso, run.cfg.particles);
    // Add runs against the default composite detector, where many particles
    // succeed at once.
    SyntheticDetector d(SyntheticDetectorSpec::defaults(SyntheticKind::kComposite));
    for (const auto& name : testing::natural_64()) {
      const Image img = testing::load_fixture(name);
      PsoConfig cfg;
      cfg.seed = 7;
      check_run(img, run_attack(img, d, cfg), cfg.particles);
    }
    verdict(checked > 0 && mismatches == 0, "selection_correctness",
            fmt("%zu runs with >= 3 successful particles, %zu mismatches against brute-force max SSIM", checked,
                mismatches));
  }

  // -- inertia ---------------------------------------------------------------
  {
    const PsoConfig cfg;
    double worst = std::fabs(inertia(0, cfg) - 5.0);
    worst = std::max(worst, std::fabs(inertia(cfg.iterations, cfg) - 1.0));
    for (std::size_t k = 1; k < cfg.iterations; ++k)
      worst = std::max(worst, std::fabs(inertia(k + 1, cfg) - 2 * inertia(k, cfg) + inertia(k - 1, cfg)));
    verdict(worst <= kInertiaTol, "inertia_schedule", fmt("max deviation %.3g (tol %.0e)", worst, kInertiaTol));
  }

  // -- feasibility ------------------------------------------------------------
  {
    const PsoConfig cfg;
    const ImageDims dims{64, 48};
    const ParamBounds fitted = cfg.bounds.fit_to(dims);
    Rng rng(derive_seed(4242, {1}));
    Particle p;
    p.position = sample_params(cfg.bounds, dims, rng);
    p.best_position = sample_params(cfg.bounds, dims, rng);
    PostProcParams g = sample_params(cfg.bounds, dims, rng);
    std::size_t violations = 0;
    auto infeasible = [&](const PostProcParams& q) {
      const auto v = q.to_vector();
      for (std::size_t d = 0; d < kParamCount; ++d)
        if (v[d] < fitted[d].lo || v[d] > fitted[d].hi) return true;
      return q.blur_size % 2 == 0 || !is_feasible(q, cfg.bounds, dims);
    };
    for (int cycle = 0; cycle < kFeasibilityCycles; ++cycle) {
      if (cycle % 100 == 0) {
        for (double& v : p.velocity) v = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-2.0, 4.0));
        g = sample_params(cfg.bounds, dims, rng);
      }
      p.velocity = update_velocity(p, g, inertia(cycle % (cfg.iterations + 1), cfg), cfg, rng);
      p.position = update_position(p, p.velocity, cfg, dims, rng);
      if (infeasible(p.position)) ++violations;
      if (rng.uniform() < 0.3) p.best_position = p.position;
    }
    verdict(violations == 0, "constraint_feasibility",
            fmt("%d update cycles, %zu infeasible positions", kFeasibilityCycles, violations));
  }

  // -- determinism --------------------------------------------------------------
  {
    std::vector<NamedImage> imgs;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& name = testing::natural_64()[2 * i];
      imgs.push_back({testing::data_path(name), testing::load_fixture(name)});
    }
    SyntheticDetector d(SyntheticDetectorSpec::defaults(SyntheticKind::kComposite));
    PsoConfig cfg;
    cfg.seed = 31337;
    const fs::path root = fs::temp_directory_path() / "fusion_acceptance_determinism";
    fs::remove_all(root);
    std::map<std::string, std::string> files[2];
    for (int r = 0; r < 2; ++r) {
      const auto batch = attack_batch(imgs, d, cfg, AblationMode::full());
      const auto row = evaluate_robustness(batch.records, d, RobustnessSpec::published_grid(TransformKind::kGaussianNoise));
      report(batch.records, std::span(&row, 1), root / std::to_string(r));
      files[r] = outcome_files(root / std::to_string(r));
    }
    std::size_t pngs = 0;
    for (const auto& [k, v] : files[0]) pngs += k.ends_with(".png");
    verdict(files[0] == files[1] && pngs == imgs.size(), "determinism",
            fmt("%zu outcome files (%zu PNGs) bitwise identical across two runs", files[0].size(), pngs));
  }

  // -- metric sanity --------------------------------------------------------------
  {
    bool self_ok = true, mono_ok = true, psnr_ok = true;
    double min_psnr = INFINITY;
    for (const auto& name : testing::natural_224()) {
      const Image x = testing::load_fixture(name);
      self_ok = self_ok && std::fabs(ssim(x, x) - 1.0) <= kSsimSelfTol;
      double prev = 1.0;
      for (int level = 1; level <= 5; ++level) {
        Rng rng(derive_seed(55, {static_cast<std::uint64_t>(level)}));
        const double sd = level / 255.0;
        const double s = ssim(x, add_gaussian_noise(x, sd * sd, rng));
        mono_ok = mono_ok && s < prev;
        prev = s;
      }
      const double db = psnr(x, jpeg_roundtrip(x, 95));
      min_psnr = std::min(min_psnr, db);
      psnr_ok = psnr_ok && db > kMinPsnr95;
    }
    verdict(self_ok && mono_ok && psnr_ok, "metric_sanity",
            fmt("self-SSIM %s, noise-grid monotone %s, min PSNR at quality 95 = %.2f dB", self_ok ? "ok" : "off",
                mono_ok ? "ok" : "broken", min_psnr));
  }

  // -- robustness grid shape -----------------------------------------------------
  {
    std::vector<NamedImage> imgs;
    for (const auto& name : testing::natural_64()) imgs.push_back({testing::data_path(name), testing::load_fixture(name)});
    SyntheticDetector d(SyntheticDetectorSpec::defaults(SyntheticKind::kComposite));
    PsoConfig cfg;
    cfg.seed = 2718;
    const auto batch = attack_batch(imgs, d, cfg, AblationMode::full());
    std::vector<double> finals;
    for (const auto& r : batch.records) finals.push_back(r.outcome.final_fitness);
    const double post = compute_asr(finals);

    const std::map<TransformKind, std::vector<double>> expected{
        {TransformKind::kJpeg, {50, 60, 70, 80, 90}},
        {TransformKind::kGaussianNoise, {1, 2, 3, 4, 5}},
        {TransformKind::kRotation, {2, 4, 6, 8, 10}},
        {TransformKind::kResize, {0.5, 0.75, 1.25, 1.5, 1.75}}};
    bool shape_ok = true;
    double avg_err = 0.0;
    std::vector<RobustnessRow> rows;
    for (const auto& spec : RobustnessSpec::published_grids()) {
      auto row = evaluate_robustness(batch.records, d, spec);
      shape_ok = shape_ok && row.levels == expected.at(spec.kind) && row.asr.size() == 5 && row.average;
      double sum = 0.0;
      for (const auto& a : row.asr) {
        shape_ok = shape_ok && a.has_value();
        sum += a.value_or(0.0);
      }
      if (row.average) avg_err = std::max(avg_err, std::fabs(*row.average - sum / 5.0));
      rows.push_back(std::move(row));
    }
    shape_ok = shape_ok && rows.size() == 4;
    const fs::path dir = fs::temp_directory_path() / "fusion_acceptance_robustness";
    fs::remove_all(dir);
    report(batch.records, rows, dir);
    std::ifstream csv(dir / "robustness.csv");
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) {
      ++lines;
      shape_ok = shape_ok && std::count(line.begin(), line.end(), ',') == 6;
    }
    shape_ok = shape_ok && lines == 8;
    const double rot0 = *evaluate_robustness(batch.records, d, {TransformKind::kRotation, {0.0}}).asr[0];
    const double jpeg100 = *evaluate_robustness(batch.records, d, {TransformKind::kJpeg, {100}}).asr[0];
    verdict(shape_ok && avg_err <= kAvgTol && rot0 == post, "robustness_grid",
            fmt("4 transforms x 5 published levels %s, max |AVG - mean| %.3g, rotate-0 ASR %.2f vs post-attack %.2f "
                "(JPEG-100 ASR %.2f, informational)",
                shape_ok ? "ok" : "wrong", avg_err, rot0, post, jpeg100));
  }

  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
