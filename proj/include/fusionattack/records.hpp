#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusionattack/harness.hpp"

namespace fusion {

// Output layout under a report directory:
//   runs/<id>.json          one RunRecord each (deterministic content)
//   adversarial/<id>.png    selected adversarial image
//   aggregate.csv           image,success,queries,ssim,final_fitness
//   timings.csv             id,wall_clock_ms
//   robustness.csv          per transform: header row of levels + AVG,
//                           then the ASR row ("NA" marks invalid cells)

nlohmann::json to_json(const PsoConfig& cfg);
PsoConfig pso_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunRecord& rec);
// The adversarial image is not part of the JSON; see load_records.
RunRecord run_record_from_json(const nlohmann::json& j);

std::string format_number(double v);

void write_aggregate_csv(const std::filesystem::path& path, std::span<const RunRecord> records);
void write_robustness_csv(const std::filesystem::path& path, std::span<const RobustnessRow> rows);

void report(std::span<const RunRecord> records, std::span<const RobustnessRow> robustness,
            const std::filesystem::path& out_dir);

// Reloads records written by report(). The adversarial image is re-rendered
// from the recorded input, parameters and noise seed when the input is
// readable (bit-exact with the attack), else read back from the PNG.
std::vector<RunRecord> load_records(const std::filesystem::path& dir);

}  // namespace fusion
