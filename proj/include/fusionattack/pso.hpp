#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fusionattack/image.hpp"
#include "fusionattack/oracle.hpp"
#include "fusionattack/params.hpp"
#include "fusionattack/rng.hpp"

namespace fusion {

struct PsoConfig {
  std::size_t particles = 100;
  std::size_t iterations = 10;  // includes the initialization pass
  double w_min = 1.0;
  double w_max = 5.0;
  double c_personal = 1.5;
  double c_global = 1.5;
  double modification_prob = 0.5;
  std::uint64_t seed = 0;
  ParamBounds bounds = ParamBounds::defaults();
  std::size_t budget = kDefaultQueryBudget;
  // Render+score workers per step; only used for concurrent-safe oracles.
  std::size_t workers = 1;

  void validate() const;
  bool exceeds_budget() const { return particles * iterations > budget; }
};

using Velocity = ParamVector;

struct Particle {
  PostProcParams position;
  Velocity velocity{};
  double fitness = 1.0;
  std::uint64_t noise_seed = 0;
  double best_fitness = 1.0;
  PostProcParams best_position;
  std::uint64_t best_noise_seed = 0;
};

// One scored render. iteration is 1-based; initialization is iteration 1.
struct Evaluation {
  std::size_t iteration = 0;
  std::size_t particle = 0;
  PostProcParams position;
  std::uint64_t noise_seed = 0;
  double fitness = 0.0;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

struct TracePoint {
  std::size_t iteration = 0;
  double best_fitness = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct SwarmState {
  std::vector<Particle> particles;
  double global_best_fitness = 1.0;
  PostProcParams global_best_position;
  std::size_t global_best_particle = 0;
  std::uint64_t global_best_noise_seed = 0;
  std::size_t iteration = 0;  // completed iterations
  std::vector<TracePoint> trace;
  std::vector<Evaluation> evaluations;
};

struct AttackOutcome {
  bool success = false;
  PostProcParams selected_position;
  std::size_t selected_particle = 0;
  std::uint64_t selected_noise_seed = 0;
  Image adversarial_image;
  double final_fitness = 1.0;
  double ssim_to_original = 0.0;
  std::size_t queries_used = 0;
  // Queries spent when the first successful evaluation was known.
  std::optional<std::size_t> queries_to_success;
  std::size_t iterations_run = 0;
  std::vector<TracePoint> fitness_trace;
  std::vector<Evaluation> evaluations;
};

// Linear inertia decay from w_max at k=0 to w_min at k=iterations.
double inertia(std::size_t k, const PsoConfig& cfg);

// v' = w*v + c_p*r_p*(pbest - pos) + c_g*r_g*(gbest - pos), with r_p then
// r_g drawn per dimension from rng.
Velocity update_velocity(const Particle& p, const PostProcParams& global_best, double w,
                         const PsoConfig& cfg, Rng& rng);

// pos + v, plus a uniform [0,1) kick in each dimension with probability
// modification_prob (one decision draw, then one value draw when taken),
// then clamp_params.
PostProcParams update_position(const Particle& p, const Velocity& v, const PsoConfig& cfg,
                               ImageDims dims, Rng& rng);

// Samples and scores N particles (N queries). Throws BudgetExhausted when
// the ledger cannot cover them; nothing is scored in that case.
SwarmState init_swarm(const PsoConfig& cfg, const Image& img, Oracle& oracle, QueryLedger& ledger);

// One synchronous iteration: every particle moves against the global best
// as it stood at the start of the step, all N renders are scored, then
// personal and global bests are updated in particle order on strict
// improvement.
void step(SwarmState& swarm, const Image& img, Oracle& oracle, const PsoConfig& cfg,
          QueryLedger& ledger);

struct Selection {
  PostProcParams position;
  Image image;
  std::size_t particle = 0;
  std::uint64_t noise_seed = 0;
  double fitness = 1.0;
  double ssim = 0.0;
};

// Failure: global best. Success: the successful personal best whose render
// (with its recorded noise seed) has the highest SSIM to the original;
// ties go to the lowest particle index.
Selection select_output(const SwarmState& swarm, const Image& img);

AttackOutcome run_attack(const Image& img, Oracle& oracle, const PsoConfig& cfg);
AttackOutcome run_attack(const Image& img, Oracle& oracle, const PsoConfig& cfg,
                         QueryLedger& ledger);

// Equal-budget baseline: floor(budget/N)*N independent uniform samples, no
// best-guided updates; reports the lowest-fitness sample.
AttackOutcome run_random_search(const Image& img, Oracle& oracle, const PsoConfig& cfg);

}  // namespace fusion
