#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "fusionattack/oracle.hpp"
#include "fusionattack/pso.hpp"
#include "fusionattack/remote.hpp"

namespace fusion {

// Minimal TOML-style key/value reader for PsoConfig. Example:
//
//   [pso]
//   particles = 100
//   iterations = 10
//   seed = 7
//   [bounds]
//   blur_size = [1, 13]
//   jpeg_quality = [10, 100]
//
// Keys may also be written as pso.particles / bounds.blur_size. Unknown keys
// are an error. Values override those already in cfg.
void apply_config_text(std::string_view text, PsoConfig& cfg);
void apply_config_file(const std::filesystem::path& path, PsoConfig& cfg);

// "synthetic:<kind>[,steepness=<a>][,threshold=<t>]" or "remote:<http url>".
// endpoint supplies retries/timeout/token for remote oracles.
std::unique_ptr<Oracle> make_oracle(std::string_view spec, const RemoteEndpoint& endpoint = {});

}  // namespace fusion
