#include "fusionattack/config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "fusionattack/errors.hpp"
#include "fusionattack/synthetic.hpp"

namespace fusion {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view s, const std::string& key) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("config key " + key + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, const std::string& key) {
  const double v = parse_number(s, key);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw InvalidArgument("config key " + key + ": expected a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::pair<double, double> parse_range(std::string_view s, const std::string& key) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw InvalidArgument("config key " + key + ": expected [lo, hi]");
  }
  s = s.substr(1, s.size() - 2);
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) throw InvalidArgument("config key " + key + ": expected [lo, hi]");
  return {parse_number(s.substr(0, comma), key), parse_number(s.substr(comma + 1), key)};
}

void apply_pso_key(const std::string& key, std::string_view value, PsoConfig& cfg) {
  const std::string full = "pso." + key;
  if (key == "particles") cfg.particles = parse_count(value, full);
  else if (key == "iterations") cfg.iterations = parse_count(value, full);
  else if (key == "budget") cfg.budget = parse_count(value, full);
  else if (key == "workers") cfg.workers = parse_count(value, full);
  else if (key == "seed") {
    const auto v = trim(value);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw InvalidArgument("config key pso.seed: expected an unsigned integer");
    }
    cfg.seed = seed;
  }
  else if (key == "w_min") cfg.w_min = parse_number(value, full);
  else if (key == "w_max") cfg.w_max = parse_number(value, full);
  else if (key == "c_personal") cfg.c_personal = parse_number(value, full);
  else if (key == "c_global") cfg.c_global = parse_number(value, full);
  else if (key == "modification_prob") cfg.modification_prob = parse_number(value, full);
  else throw InvalidArgument("unknown config key " + full);
}

void apply_bounds_key(const std::string& key, std::string_view value, PsoConfig& cfg) {
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto p = static_cast<Param>(i);
    if (param_name(p) == key) {
      const auto [lo, hi] = parse_range(value, "bounds." + key);
      cfg.bounds.set(p, lo, hi);
      return;
    }
  }
  throw InvalidArgument("unknown config key bounds." + key);
}

}  // namespace

void apply_config_text(std::string_view text, PsoConfig& cfg) {
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string_view::npos) {
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "pso" && section != "bounds") {
        throw InvalidArgument("unknown config section [" + section + "] on line " +
                              std::to_string(line_no));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + " is not key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    std::string sec = section;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      sec = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    if (sec == "bounds") apply_bounds_key(key, value, cfg);
    else if (sec == "pso" || sec.empty()) apply_pso_key(key, value, cfg);
    else throw InvalidArgument("unknown config key " + sec + "." + key);
  }
}

void apply_config_file(const std::filesystem::path& path, PsoConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  apply_config_text(text, cfg);
}

std::unique_ptr<Oracle> make_oracle(std::string_view spec, const RemoteEndpoint& endpoint) {
  constexpr std::string_view synthetic = "synthetic:";
  constexpr std::string_view remote = "remote:";
  if (spec.substr(0, synthetic.size()) == synthetic) {
    std::vector<std::string_view> parts;
    std::string_view rest = spec.substr(synthetic.size());
    while (true) {
      const auto comma = rest.find(',');
      parts.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    const auto kind = parse_synthetic_kind(parts[0]);
    if (!kind) throw InvalidArgument("unknown synthetic detector '" + std::string(parts[0]) + "'");
    auto s = SyntheticDetectorSpec::defaults(*kind);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      const std::string key(parts[i].substr(0, eq));
      if (eq == std::string_view::npos || *kind == SyntheticKind::kComposite) {
        throw InvalidArgument("bad synthetic detector option '" + std::string(parts[i]) + "'");
      }
      const double v = parse_number(parts[i].substr(eq + 1), key);
      if (key == "steepness") s.steepness = v;
      else if (key == "threshold") s.threshold = v;
      else throw InvalidArgument("unknown synthetic detector option '" + key + "'");
    }
    return std::make_unique<SyntheticDetector>(std::move(s));
  }
  if (spec.substr(0, remote.size()) == remote) {
    RemoteEndpoint ep = endpoint;
    ep.url = std::string(spec.substr(remote.size()));
    return std::make_unique<RemoteOracle>(std::move(ep));
  }
  throw InvalidArgument("oracle must be synthetic:<kind> or remote:<url>, got '" +
                        std::string(spec) + "'");
}

}  // namespace fusion
