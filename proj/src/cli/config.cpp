#include "cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "qslice/catalog.hpp"
#include "qslice/errors.hpp"

namespace qslice::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
  }
}

double number(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InvalidInput(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t count(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw InvalidInput(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string text(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw InvalidInput(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv("QSLICE_SEED");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || *env == '-') throw InvalidInput(std::string("QSLICE_SEED is not an unsigned integer: ") + env);
  return v;
}

ScenarioConfig default_config() {
  ScenarioConfig c;
  c.seed = default_seed();
  return c;
}

ScenarioConfig config_from_json(const json& doc) {
  reject_unknown(doc, {"n", "p_m", "f_m", "t_r", "s_p", "catalog", "rounds", "seed", "workers", "reassignment", "validate"},
                 "config");
  ScenarioConfig c = default_config();
  auto& p = c.params;
  if (doc.contains("n")) p.devices_per_flow = count(doc, "n");
  if (doc.contains("p_m")) p.malicious_probability = number(doc, "p_m");
  if (doc.contains("f_m")) p.attack_frequency_ratio = number(doc, "f_m");
  if (doc.contains("t_r")) p.threshold_ratio = number(doc, "t_r");
  if (doc.contains("s_p")) p.sampling_period_s = number(doc, "s_p");
  if (doc.contains("catalog")) p.catalog = catalog_from_json(doc.at("catalog"));
  if (doc.contains("rounds")) c.rounds = count(doc, "rounds");
  if (doc.contains("seed")) c.seed = count(doc, "seed");
  if (doc.contains("workers")) c.workers = static_cast<unsigned>(count(doc, "workers"));
  if (doc.contains("reassignment")) {
    const auto& r = doc.at("reassignment");
    reject_unknown(r, {"mode", "timing", "reps"}, "reassignment");
    if (r.contains("mode")) c.mode = parse_reassignment_mode(text(r, "mode"));
    if (r.contains("timing")) c.timing = parse_timing_sampling(text(r, "timing"));
    if (r.contains("reps")) c.reps = count(r, "reps");
  }
  if (doc.contains("validate")) {
    const auto& v = doc.at("validate");
    reject_unknown(v, {"tolerance_se"}, "validate");
    if (v.contains("tolerance_se")) c.tolerance_se = number(v, "tolerance_se");
  }

  p.validate();
  if (c.rounds < 1) throw InvalidInput("rounds must be at least 1");
  if (c.reps < 1) throw InvalidInput("reassignment.reps must be at least 1");
  if (!(c.tolerance_se > 0.0)) throw InvalidInput("validate.tolerance_se must be positive");
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  return {{"n", c.params.devices_per_flow},
          {"p_m", c.params.malicious_probability},
          {"f_m", c.params.attack_frequency_ratio},
          {"t_r", c.params.threshold_ratio},
          {"s_p", c.params.sampling_period_s},
          {"catalog", catalog_to_json(c.params.catalog)},
          {"rounds", c.rounds},
          {"seed", c.seed},
          {"workers", c.workers},
          {"reassignment", {{"mode", to_string(c.mode)}, {"timing", to_string(c.timing)}, {"reps", c.reps}}},
          {"validate", {{"tolerance_se", c.tolerance_se}}}};
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace qslice::cli
