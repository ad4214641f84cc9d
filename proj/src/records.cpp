#include "fusionattack/records.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <fstream>
#include <sstream>

#include "fusionattack/codec.hpp"
#include "fusionattack/errors.hpp"
#include "fusionattack/ops.hpp"

namespace fusion {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string_view kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::kContinuous: return "continuous";
    case ParamKind::kInteger: return "integer";
    case ParamKind::kOddInteger: return "odd-integer";
  }
  return "?";
}

ParamKind parse_kind(const std::string& s) {
  if (s == "continuous") return ParamKind::kContinuous;
  if (s == "integer") return ParamKind::kInteger;
  if (s == "odd-integer") return ParamKind::kOddInteger;
  throw InvalidArgument("unknown parameter kind " + s);
}

json params_to_json(const PostProcParams& p) {
  json j = json::object();
  const auto v = p.to_vector();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    j[std::string(param_name(static_cast<Param>(i)))] = v[i];
  }
  return j;
}

PostProcParams params_from_json(const json& j) {
  ParamVector v{};
  for (std::size_t i = 0; i < kParamCount; ++i) {
    v[i] = j.at(std::string(param_name(static_cast<Param>(i)))).get<double>();
  }
  return PostProcParams::from_vector(v);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json to_json(const PsoConfig& cfg) {
  json bounds = json::object();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto& r = cfg.bounds[i];
    bounds[std::string(param_name(static_cast<Param>(i)))] = {
        {"lo", r.lo}, {"hi", r.hi}, {"kind", kind_name(r.kind)}};
  }
  return {{"particles", cfg.particles},
          {"iterations", cfg.iterations},
          {"w_min", cfg.w_min},
          {"w_max", cfg.w_max},
          {"c_personal", cfg.c_personal},
          {"c_global", cfg.c_global},
          {"modification_prob", cfg.modification_prob},
          {"seed", cfg.seed},
          {"budget", cfg.budget},
          {"bounds", bounds}};
}

PsoConfig pso_config_from_json(const json& j) {
  PsoConfig cfg;
  cfg.particles = j.at("particles").get<std::size_t>();
  cfg.iterations = j.at("iterations").get<std::size_t>();
  cfg.w_min = j.at("w_min").get<double>();
  cfg.w_max = j.at("w_max").get<double>();
  cfg.c_personal = j.at("c_personal").get<double>();
  cfg.c_global = j.at("c_global").get<double>();
  cfg.modification_prob = j.at("modification_prob").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.budget = j.at("budget").get<std::size_t>();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto p = static_cast<Param>(i);
    const auto& b = j.at("bounds").at(std::string(param_name(p)));
    cfg.bounds[p] = {b.at("lo").get<double>(), b.at("hi").get<double>(),
                     parse_kind(b.at("kind").get<std::string>())};
  }
  return cfg;
}

json to_json(const RunRecord& rec) {
  const auto& o = rec.outcome;
  json trace = json::array();
  for (const auto& t : o.fitness_trace) trace.push_back({t.iteration, t.best_fitness});
  json evals = json::array();
  for (const auto& e : o.evaluations) {
    evals.push_back({e.iteration, e.particle, e.position.to_vector(), e.noise_seed, e.fitness});
  }
  json outcome = {{"success", o.success},
                  {"selected_position", params_to_json(o.selected_position)},
                  {"selected_particle", o.selected_particle},
                  {"selected_noise_seed", o.selected_noise_seed},
                  {"final_fitness", o.final_fitness},
                  {"ssim_to_original", o.ssim_to_original},
                  {"queries_used", o.queries_used},
                  {"queries_to_success", o.queries_to_success ? json(*o.queries_to_success) : json()},
                  {"iterations_run", o.iterations_run},
                  {"fitness_trace", trace},
                  {"adversarial_image", "adversarial/" + rec.id + ".png"}};
  return {{"id", rec.id},
          {"input_path", rec.input_path},
          {"detector_id", rec.detector_id},
          {"mode", rec.mode.to_string()},
          {"config", to_json(rec.config)},
          {"outcome", outcome},
          {"evaluations", evals}};
}

RunRecord run_record_from_json(const json& j) {
  RunRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.input_path = j.at("input_path").get<std::string>();
  rec.detector_id = j.at("detector_id").get<std::string>();
  rec.mode = AblationMode::parse(j.at("mode").get<std::string>());
  rec.config = pso_config_from_json(j.at("config"));
  const auto& o = j.at("outcome");
  auto& out = rec.outcome;
  out.success = o.at("success").get<bool>();
  out.selected_position = params_from_json(o.at("selected_position"));
  out.selected_particle = o.at("selected_particle").get<std::size_t>();
  out.selected_noise_seed = o.at("selected_noise_seed").get<std::uint64_t>();
  out.final_fitness = o.at("final_fitness").get<double>();
  out.ssim_to_original = o.at("ssim_to_original").get<double>();
  out.queries_used = o.at("queries_used").get<std::size_t>();
  if (!o.at("queries_to_success").is_null()) {
    out.queries_to_success = o.at("queries_to_success").get<std::size_t>();
  }
  out.iterations_run = o.at("iterations_run").get<std::size_t>();
  for (const auto& t : o.at("fitness_trace")) {
    out.fitness_trace.push_back({t.at(0).get<std::size_t>(), t.at(1).get<double>()});
  }
  for (const auto& e : j.at("evaluations")) {
    out.evaluations.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                               PostProcParams::from_vector(e.at(2).get<ParamVector>()),
                               e.at(3).get<std::uint64_t>(), e.at(4).get<double>()});
  }
  return rec;
}

void write_aggregate_csv(const fs::path& path, std::span<const RunRecord> records) {
  std::ostringstream out;
  out << "image,success,queries,ssim,final_fitness\n";
  for (const auto& r : records) {
    out << csv_field(r.input_path) << ',' << (r.outcome.success ? 1 : 0) << ','
        << r.outcome.queries_used << ',' << format_number(r.outcome.ssim_to_original) << ','
        << format_number(r.outcome.final_fitness) << '\n';
  }
  write_text(path, out.str());
}

void write_robustness_csv(const fs::path& path, std::span<const RobustnessRow> rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << "transform";
    for (double l : row.levels) out << ',' << format_number(l);
    out << ",AVG\n" << to_string(row.kind);
    for (const auto& a : row.asr) out << ',' << (a ? format_number(*a) : "NA");
    out << ',' << (row.average ? format_number(*row.average) : "NA") << '\n';
  }
  write_text(path, out.str());
}

void report(std::span<const RunRecord> records, std::span<const RobustnessRow> robustness,
            const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "runs", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "runs").string() + ": " + ec.message());
  fs::create_directories(out_dir / "adversarial", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "adversarial").string() + ": " + ec.message());

  std::ostringstream timings;
  timings << "id,wall_clock_ms\n";
  for (const auto& r : records) {
    write_text(out_dir / "runs" / (r.id + ".json"), to_json(r).dump(1) + "\n");
    if (!r.outcome.adversarial_image.empty()) {
      write_png(out_dir / "adversarial" / (r.id + ".png"), r.outcome.adversarial_image);
    }
    timings << r.id << ',' << format_number(r.wall_clock_ms) << '\n';
  }
  write_text(out_dir / "timings.csv", timings.str());
  write_aggregate_csv(out_dir / "aggregate.csv", records);
  if (!robustness.empty()) write_robustness_csv(out_dir / "robustness.csv", robustness);
}

std::vector<RunRecord> load_records(const fs::path& dir) {
  const fs::path runs = dir / "runs";
  if (!fs::is_directory(runs)) throw IoError("no runs/ directory under " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, double> timing;
  if (std::ifstream t(dir / "timings.csv"); t) {
    std::string line;
    std::getline(t, line);
    while (std::getline(t, line)) {
      const auto comma = line.rfind(',');
      if (comma == std::string::npos) continue;
      timing[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
  }

  std::vector<RunRecord> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoError("cannot open " + f.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw IoError(f.string() + ": " + e.what());
    }
    RunRecord rec = run_record_from_json(j);
    if (auto it = timing.find(rec.id); it != timing.end()) rec.wall_clock_ms = it->second;
    try {
      const Image original = read_png(rec.input_path);
      rec.outcome.adversarial_image =
          apply_fusion(original, rec.outcome.selected_position, rec.outcome.selected_noise_seed);
    } catch (const Error&) {
      const fs::path png = dir / "adversarial" / (rec.id + ".png");
      if (fs::exists(png)) rec.outcome.adversarial_image = read_png(png);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace fusion
