#include "fusionattack/pso.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>

#include "fusionattack/errors.hpp"
#include "fusionattack/metrics.hpp"
#include "fusionattack/ops.hpp"

namespace fusion {

void PsoConfig::validate() const {
  if (particles < 1) throw InvalidArgument("particle count must be >= 1");
  if (iterations < 1) throw InvalidArgument("iteration count must be >= 1");
  if (!(w_min > 0.0) || w_min > w_max) throw InvalidArgument("inertia range must satisfy 0 < w_min <= w_max");
  if (!(c_personal >= 0.0) || !(c_global >= 0.0)) {
    throw InvalidArgument("confidence coefficients must be non-negative");
  }
  if (!(modification_prob >= 0.0 && modification_prob <= 1.0)) {
    throw InvalidArgument("modification probability must lie in [0,1]");
  }
  if (workers < 1) throw InvalidArgument("worker count must be >= 1");
  bounds.validate();
}

double inertia(std::size_t k, const PsoConfig& cfg) {
  return cfg.w_max - (cfg.w_max - cfg.w_min) * static_cast<double>(k) /
                         static_cast<double>(cfg.iterations);
}

Velocity update_velocity(const Particle& p, const PostProcParams& global_best, double w,
                         const PsoConfig& cfg, Rng& rng) {
  const auto pos = p.position.to_vector();
  const auto pbest = p.best_position.to_vector();
  const auto gbest = global_best.to_vector();
  Velocity out{};
  for (std::size_t j = 0; j < kParamCount; ++j) {
    const double r_p = rng.uniform();
    const double r_g = rng.uniform();
    out[j] = w * p.velocity[j] + cfg.c_personal * r_p * (pbest[j] - pos[j]) +
             cfg.c_global * r_g * (gbest[j] - pos[j]);
  }
  return out;
}

PostProcParams update_position(const Particle& p, const Velocity& v, const PsoConfig& cfg,
                               ImageDims dims, Rng& rng) {
  auto raw = p.position.to_vector();
  for (std::size_t j = 0; j < kParamCount; ++j) {
    raw[j] += v[j];
    if (rng.uniform() < cfg.modification_prob) raw[j] += rng.uniform();
  }
  return clamp_params(raw, cfg.bounds, dims);
}

namespace {

ImageDims dims_of(const Image& img) { return {img.width(), img.height()}; }

// Renders and scores each (position, seed) pair. Results land in index
// order regardless of worker count; the first failure (by index) is
// rethrown after all workers finish, with completed scores kept.
struct BatchResult {
  std::vector<std::optional<double>> fitness;
  std::exception_ptr error;
};

BatchResult evaluate_all(const std::vector<PostProcParams>& positions,
                         const std::vector<std::uint64_t>& seeds, const Image& img,
                         Oracle& oracle, QueryLedger& ledger, std::size_t workers) {
  const std::size_t n = positions.size();
  BatchResult out;
  out.fitness.resize(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t i) {
    try {
      const Image rendered = apply_fusion(img, positions[i], seeds[i]);
      out.fitness[i] = score(oracle, rendered, ledger).fake_probability;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1 || !oracle.concurrent_safe() || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      work(i);
      if (errors[i]) break;
    }
  } else {
    const std::size_t count = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += count) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) {
      out.error = e;
      break;
    }
  }
  return out;
}

}  // namespace

SwarmState init_swarm(const PsoConfig& cfg, const Image& img, Oracle& oracle, QueryLedger& ledger) {
  cfg.validate();
  if (ledger.remaining() < cfg.particles) {
    throw BudgetExhausted("budget of " + std::to_string(ledger.remaining()) +
                          " cannot cover initialization of " + std::to_string(cfg.particles) +
                          " particles");
  }
  const ImageDims dims = dims_of(img);
  const std::size_t n = cfg.particles;
  SwarmState swarm;
  swarm.particles.resize(n);
  std::vector<PostProcParams> positions(n);
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, Stream::kInit, i));
    auto& p = swarm.particles[i];
    p.position = sample_params(cfg.bounds, dims, rng);
    for (double& v : p.velocity) v = rng.uniform(-1.0, 1.0);
    p.noise_seed = derive_seed(cfg.seed, Stream::kNoise, i, 1);
    positions[i] = p.position;
    seeds[i] = p.noise_seed;
  }

  auto result = evaluate_all(positions, seeds, img, oracle, ledger, cfg.workers);
  if (result.error) std::rethrow_exception(result.error);

  for (std::size_t i = 0; i < n; ++i) {
    auto& p = swarm.particles[i];
    p.fitness = *result.fitness[i];
    p.best_fitness = p.fitness;
    p.best_position = p.position;
    p.best_noise_seed = p.noise_seed;
    swarm.evaluations.push_back({1, i, p.position, p.noise_seed, p.fitness});
    if (i == 0 || p.best_fitness < swarm.global_best_fitness) {
      swarm.global_best_fitness = p.best_fitness;
      swarm.global_best_position = p.best_position;
      swarm.global_best_particle = i;
      swarm.global_best_noise_seed = p.best_noise_seed;
    }
  }
  swarm.iteration = 1;
  swarm.trace.push_back({1, swarm.global_best_fitness});
  return swarm;
}

void step(SwarmState& swarm, const Image& img, Oracle& oracle, const PsoConfig& cfg,
          QueryLedger& ledger) {
  const ImageDims dims = dims_of(img);
  const std::size_t n = swarm.particles.size();
  const std::size_t k = swarm.iteration;
  const std::size_t next = k + 1;
  const double w = inertia(k, cfg);
  const PostProcParams gbest = swarm.global_best_position;

  std::vector<PostProcParams> positions(n);
  std::vector<Velocity> velocities(n);
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, Stream::kUpdate, i, next));
    const auto& p = swarm.particles[i];
    velocities[i] = update_velocity(p, gbest, w, cfg, rng);
    positions[i] = update_position(p, velocities[i], cfg, dims, rng);
    seeds[i] = derive_seed(cfg.seed, Stream::kNoise, i, next);
  }

  auto result = evaluate_all(positions, seeds, img, oracle, ledger, cfg.workers);

  for (std::size_t i = 0; i < n; ++i) {
    if (!result.fitness[i]) continue;
    auto& p = swarm.particles[i];
    p.position = positions[i];
    p.velocity = velocities[i];
    p.noise_seed = seeds[i];
    p.fitness = *result.fitness[i];
    swarm.evaluations.push_back({next, i, p.position, p.noise_seed, p.fitness});
    if (p.fitness < p.best_fitness) {
      p.best_fitness = p.fitness;
      p.best_position = p.position;
      p.best_noise_seed = p.noise_seed;
    }
    if (p.best_fitness < swarm.global_best_fitness) {
      swarm.global_best_fitness = p.best_fitness;
      swarm.global_best_position = p.best_position;
      swarm.global_best_particle = i;
      swarm.global_best_noise_seed = p.best_noise_seed;
    }
  }
  if (result.error) std::rethrow_exception(result.error);
  swarm.iteration = next;
  swarm.trace.push_back({next, swarm.global_best_fitness});
}

Selection select_output(const SwarmState& swarm, const Image& img) {
  Selection sel;
  if (swarm.global_best_fitness >= kDecisionThreshold) {
    sel.position = swarm.global_best_position;
    sel.particle = swarm.global_best_particle;
    sel.noise_seed = swarm.global_best_noise_seed;
    sel.fitness = swarm.global_best_fitness;
    sel.image = apply_fusion(img, sel.position, sel.noise_seed);
    sel.ssim = ssim(img, sel.image);
    return sel;
  }
  bool found = false;
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    const auto& p = swarm.particles[i];
    if (!(p.best_fitness < kDecisionThreshold)) continue;
    Image rendered = apply_fusion(img, p.best_position, p.best_noise_seed);
    const double s = ssim(img, rendered);
    if (!found || s > sel.ssim) {
      found = true;
      sel.position = p.best_position;
      sel.particle = i;
      sel.noise_seed = p.best_noise_seed;
      sel.fitness = p.best_fitness;
      sel.ssim = s;
      sel.image = std::move(rendered);
    }
  }
  return sel;
}

AttackOutcome run_attack(const Image& img, Oracle& oracle, const PsoConfig& cfg) {
  QueryLedger ledger(cfg.budget);
  return run_attack(img, oracle, cfg, ledger);
}

AttackOutcome run_attack(const Image& img, Oracle& oracle, const PsoConfig& cfg,
                         QueryLedger& ledger) {
  const std::size_t used_before = ledger.used();
  SwarmState swarm = init_swarm(cfg, img, oracle, ledger);
  while (swarm.iteration < cfg.iterations && swarm.global_best_fitness >= kDecisionThreshold &&
         ledger.remaining() >= cfg.particles) {
    try {
      step(swarm, img, oracle, cfg, ledger);
    } catch (const BudgetExhausted&) {
      break;
    }
  }

  Selection sel = select_output(swarm, img);
  AttackOutcome out;
  out.success = sel.fitness < kDecisionThreshold;
  out.selected_position = sel.position;
  out.selected_particle = sel.particle;
  out.selected_noise_seed = sel.noise_seed;
  out.adversarial_image = std::move(sel.image);
  out.final_fitness = sel.fitness;
  out.ssim_to_original = sel.ssim;
  out.queries_used = ledger.used() - used_before;
  if (out.success) out.queries_to_success = out.queries_used;
  out.iterations_run = swarm.iteration;
  out.fitness_trace = std::move(swarm.trace);
  out.evaluations = std::move(swarm.evaluations);
  return out;
}

AttackOutcome run_random_search(const Image& img, Oracle& oracle, const PsoConfig& cfg) {
  cfg.validate();
  const ImageDims dims = dims_of(img);
  const std::size_t rounds = cfg.budget / cfg.particles;
  QueryLedger ledger(cfg.budget);
  AttackOutcome out;
  double best = 1.0;
  bool have_best = false;
  for (std::size_t round = 0; round < rounds; ++round) {
    std::vector<PostProcParams> positions(cfg.particles);
    std::vector<std::uint64_t> seeds(cfg.particles);
    for (std::size_t i = 0; i < cfg.particles; ++i) {
      const std::size_t q = round * cfg.particles + i;
      Rng rng(derive_seed(cfg.seed, Stream::kRandomBaseline, q));
      positions[i] = sample_params(cfg.bounds, dims, rng);
      seeds[i] = derive_seed(cfg.seed, Stream::kRandomBaseline, q, 1);
    }
    auto result = evaluate_all(positions, seeds, img, oracle, ledger, cfg.workers);
    if (result.error) std::rethrow_exception(result.error);
    for (std::size_t i = 0; i < cfg.particles; ++i) {
      const double f = *result.fitness[i];
      out.evaluations.push_back({round + 1, i, positions[i], seeds[i], f});
      if (!out.queries_to_success && f < kDecisionThreshold) {
        out.queries_to_success = round * cfg.particles + i + 1;
      }
      if (!have_best || f < best) {
        have_best = true;
        best = f;
        out.selected_position = positions[i];
        out.selected_particle = i;
        out.selected_noise_seed = seeds[i];
      }
    }
    out.fitness_trace.push_back({round + 1, best});
  }
  out.iterations_run = rounds;
  out.queries_used = ledger.used();
  out.final_fitness = best;
  out.success = have_best && best < kDecisionThreshold;
  if (have_best) {
    out.adversarial_image = apply_fusion(img, out.selected_position, out.selected_noise_seed);
    out.ssim_to_original = ssim(img, out.adversarial_image);
  }
  return out;
}

}  // namespace fusion
