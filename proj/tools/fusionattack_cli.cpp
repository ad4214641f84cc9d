// fusionattack: attack, robustness and report subcommands.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 some inputs were skipped,
// 3 the oracle failed (partial results are still written).

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fusionattack/config.hpp"
#include "fusionattack/errors.hpp"
#include "fusionattack/harness.hpp"
#include "fusionattack/records.hpp"

using namespace fusion;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;
constexpr int kExitOracle = 3;

struct EndpointFlags {
  int retries = 3;
  int timeout_ms = 10000;
  std::string token;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--retries", retries, "Extra attempts for remote oracles")->check(CLI::NonNegativeNumber);
    cmd->add_option("--timeout-ms", timeout_ms, "Per-request timeout for remote oracles")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--token", token, "Bearer token for remote oracles");
  }

  RemoteEndpoint endpoint() const {
    RemoteEndpoint e;
    e.retries = retries;
    e.timeout = std::chrono::milliseconds(timeout_ms);
    e.bearer_token = token;
    return e;
  }
};

struct AttackFlags {
  std::string input;
  std::string oracle = "synthetic:composite";
  std::string out = "fusion_out";
  std::string config;
  std::string mode = "full";
  std::optional<std::size_t> particles, iterations, budget, workers;
  std::optional<std::uint64_t> seed;
  EndpointFlags endpoint;
};

int run_attack_cmd(const AttackFlags& f) {
  PsoConfig cfg;
  if (!f.config.empty()) apply_config_file(f.config, cfg);
  if (f.particles) cfg.particles = *f.particles;
  if (f.iterations) cfg.iterations = *f.iterations;
  if (f.budget) cfg.budget = *f.budget;
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  cfg.validate();
  const AblationMode mode = AblationMode::parse(f.mode);
  if (cfg.exceeds_budget())
    std::fprintf(stderr, "warning: %zu particles x %zu iterations exceeds the budget of %zu; the run stops early\n",
                 cfg.particles, cfg.iterations, cfg.budget);

  auto oracle = make_oracle(f.oracle, f.endpoint.endpoint());
  const auto paths = collect_inputs(f.input);
  if (paths.empty()) throw IoError("no PNG inputs under " + f.input);

  const auto batch = attack_batch(paths, *oracle, cfg, mode);
  report(batch.records, {}, f.out);

  std::size_t successes = 0;
  for (const auto& r : batch.records) successes += r.outcome.success;
  std::printf("%zu/%zu attacks succeeded; results in %s\n", successes, batch.records.size(), f.out.c_str());
  for (const auto& s : batch.skipped) std::fprintf(stderr, "skipped %s\n", s.c_str());
  if (batch.oracle_failure) {
    std::fprintf(stderr, "oracle failure: %s\n", batch.oracle_failure->c_str());
    return kExitOracle;
  }
  return batch.skipped.empty() ? kExitOk : kExitPartial;
}

struct RobustnessFlags {
  std::string records;
  std::string out;
  std::string oracle;
  std::vector<std::string> transforms;
  std::vector<double> levels;
  bool published_only = false;
  bool successful_only = false;
  std::uint64_t seed = 0;
  EndpointFlags endpoint;
};

int run_robustness_cmd(const RobustnessFlags& f) {
  const auto records = load_records(f.records);
  if (records.empty()) throw IoError("no run records under " + f.records);

  std::vector<RobustnessSpec> specs;
  if (f.transforms.empty()) {
    if (!f.levels.empty()) throw InvalidArgument("--levels needs --transform");
    specs = RobustnessSpec::published_grids();
  }
  for (const auto& name : f.transforms) {
    const auto kind = parse_transform_kind(name);
    if (!kind) throw InvalidArgument("unknown transform: " + name);
    RobustnessSpec spec = f.levels.empty() ? RobustnessSpec::published_grid(*kind) : RobustnessSpec{*kind, f.levels};
    spec.validate(f.published_only);
    specs.push_back(std::move(spec));
  }

  const std::string oracle_spec = f.oracle.empty() ? records.front().detector_id : f.oracle;
  auto oracle = make_oracle(oracle_spec, f.endpoint.endpoint());
  RobustnessOptions opts;
  opts.successful_only = f.successful_only;
  opts.seed = f.seed;

  std::vector<RobustnessRow> rows;
  bool any_invalid = false;
  for (const auto& spec : specs) {
    rows.push_back(evaluate_robustness(records, *oracle, spec, opts));
    for (const auto& e : rows.back().errors)
      if (!e.empty()) {
        any_invalid = true;
        std::fprintf(stderr, "%s: %s\n", std::string(to_string(spec.kind)).c_str(), e.c_str());
      }
  }
  const fs::path out = f.out.empty() ? fs::path(f.records) : fs::path(f.out);
  fs::create_directories(out);
  write_robustness_csv(out / "robustness.csv", rows);
  std::printf("robustness over %zu records written to %s\n", records.size(), (out / "robustness.csv").c_str());
  return any_invalid ? kExitOracle : kExitOk;
}

int run_report_cmd(const std::string& records_dir, const std::string& out) {
  const auto records = load_records(records_dir);
  report(records, {}, out);
  std::printf("%zu records written to %s\n", records.size(), out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box post-processing attack toolkit"};
  app.require_subcommand(1);

  AttackFlags af;
  auto* attack = app.add_subcommand("attack", "Attack PNG images against an oracle");
  attack->add_option("--input", af.input, "PNG file or directory")->required();
  attack->add_option("--oracle", af.oracle, "synthetic:<kind>[,steepness=a][,threshold=t] or remote:<url>");
  attack->add_option("--particles", af.particles, "Swarm size");
  attack->add_option("--iterations", af.iterations, "Iterations, including initialization");
  attack->add_option("--budget", af.budget, "Query budget per image");
  attack->add_option("--seed", af.seed, "Master seed");
  attack->add_option("--workers", af.workers, "Concurrent renders for thread-safe oracles");
  attack->add_option("--mode", af.mode, "full, random, only:<op> or without:<op> (op: GB, JPEG, GN, LS)");
  attack->add_option("--config", af.config, "Key/value config file; flags override it");
  attack->add_option("--out", af.out, "Output directory");
  af.endpoint.add_to(attack);

  RobustnessFlags rf;
  auto* robust = app.add_subcommand("robustness", "Re-score adversarial images under post-processing");
  robust->add_option("--records", rf.records, "Directory written by attack")->required();
  robust->add_option("--transform", rf.transforms, "jpeg, gaussian-noise, rotation or resize (repeatable)");
  robust->add_option("--levels", rf.levels, "Levels for the transform")->delimiter(',');
  robust->add_flag("--paper-grid", rf.published_only, "Only accept the published levels");
  robust->add_flag("--successful-only", rf.successful_only, "Restrict to successful attacks");
  robust->add_option("--oracle", rf.oracle, "Oracle spec; defaults to the recorded detector");
  robust->add_option("--seed", rf.seed, "Seed for stochastic transforms");
  robust->add_option("--out", rf.out, "Output directory; defaults to --records");
  rf.endpoint.add_to(robust);

  std::string rep_records, rep_out;
  auto* rep = app.add_subcommand("report", "Rewrite records, aggregate CSV and PNGs");
  rep->add_option("--records", rep_records, "Directory written by attack")->required();
  rep->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (attack->parsed()) return run_attack_cmd(af);
    if (robust->parsed()) return run_robustness_cmd(rf);
    return run_report_cmd(rep_records, rep_out);
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOracle;
  } catch (const TransportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOracle;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}
