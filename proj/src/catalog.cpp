#include "qslice/catalog.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "qslice/errors.hpp"

namespace qslice {

double legit_rate(const DeviceTypeSpec& spec) {
  return static_cast<double>(spec.frame_size_bytes) * 8.0 * 1000.0 / spec.transmission_period_ms;
}

Catalog::Catalog(std::vector<DeviceTypeSpec> types, std::vector<double> type_probabilities)
    : types_(std::move(types)), probabilities_(std::move(type_probabilities)) {
  if (types_.empty()) throw InvalidInput("catalog has no device types");
  if (types_.size() != probabilities_.size()) {
    throw InvalidInput("catalog has " + std::to_string(types_.size()) + " types but " +
                       std::to_string(probabilities_.size()) + " probabilities");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    const auto& t = types_[i];
    if (t.id != i) throw InvalidInput("type '" + t.name + "' has id " + std::to_string(t.id) +
                                      " at position " + std::to_string(i));
    if (!(t.transmission_period_ms > 0.0) || !std::isfinite(t.transmission_period_ms)) {
      throw InvalidInput("type '" + t.name + "' needs a positive transmission period");
    }
    if (t.frame_size_bytes == 0) throw InvalidInput("type '" + t.name + "' needs a positive frame size");
    if (!(probabilities_[i] >= 0.0) || probabilities_[i] > 1.0) {
      throw InvalidInput("type probability out of [0, 1] for '" + t.name + "'");
    }
    total += probabilities_[i];
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw InvalidInput("type probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

Catalog Catalog::with_probabilities(std::vector<double> type_probabilities) const {
  return Catalog(types_, std::move(type_probabilities));
}

Catalog builtin_factory_catalog() {
  // Factory-automation use cases: latency (ms), PLR, period (ms), frame (bytes).
  auto make = [](std::size_t id, std::string name, double latency, double period, std::uint32_t frame) {
    DeviceTypeSpec s;
    s.id = id;
    s.name = std::move(name);
    s.latency_bound_ms = latency;
    s.reliability_plr = 1e-9;
    s.transmission_period_ms = period;
    s.frame_size_bytes = frame;
    s.device_density = "0.33 to 3 devices/m3";
    s.communication_range = "50 to 100 m";
    s.mobility = "<30 km/h";
    return s;
  };
  std::vector<DeviceTypeSpec> types{
      make(0, "manufacturing cell", 5.0, 50.0, 15),
      make(1, "machine tools", 0.25, 0.5, 50),
      make(2, "printing machines", 1.0, 2.0, 30),
      make(3, "packaging machines", 25.0, 5.0, 15),
  };
  return Catalog(std::move(types), {0.25, 0.25, 0.25, 0.25});
}

double mean_rate(const Catalog& catalog) {
  double sum = 0.0;
  for (std::size_t i = 0; i < catalog.size(); ++i) sum += catalog.rate(i) * catalog.probability(i);
  return sum;
}

namespace {

const std::set<std::string> kTypeKeys{"name",           "transmission_period_ms", "frame_size_bytes",
                                       "latency_bound_ms", "reliability_plr",     "device_density",
                                       "communication_range", "mobility"};

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw InvalidInput(where + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(where + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace

Catalog catalog_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidInput("catalog must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "types" && key != "type_probabilities") throw InvalidInput("catalog: unknown key '" + key + "'");
  }
  if (!doc.contains("types") || !doc["types"].is_array()) throw InvalidInput("catalog: 'types' array required");
  std::vector<DeviceTypeSpec> types;
  for (const auto& item : doc["types"]) {
    const std::string where = "catalog type " + std::to_string(types.size());
    if (!item.is_object()) throw InvalidInput(where + ": must be an object");
    for (const auto& [key, _] : item.items()) {
      if (!kTypeKeys.contains(key)) throw InvalidInput(where + ": unknown key '" + key + "'");
    }
    DeviceTypeSpec s;
    s.id = types.size();
    s.name = field<std::string>(item, "name", where);
    s.transmission_period_ms = field<double>(item, "transmission_period_ms", where);
    const double frame = field<double>(item, "frame_size_bytes", where);
    if (!(frame >= 1.0) || frame != std::floor(frame) || frame > 4.0e9) {
      throw InvalidInput(where + ": frame_size_bytes must be a positive integer");
    }
    s.frame_size_bytes = static_cast<std::uint32_t>(frame);
    s.latency_bound_ms = item.value("latency_bound_ms", 0.0);
    s.reliability_plr = item.value("reliability_plr", 0.0);
    s.device_density = item.value("device_density", "");
    s.communication_range = item.value("communication_range", "");
    s.mobility = item.value("mobility", "");
    types.push_back(std::move(s));
  }
  std::vector<double> probs;
  if (doc.contains("type_probabilities")) {
    probs = field<std::vector<double>>(doc, "type_probabilities", "catalog");
  } else {
    probs.assign(types.size(), types.empty() ? 0.0 : 1.0 / static_cast<double>(types.size()));
  }
  return Catalog(std::move(types), std::move(probs));
}

nlohmann::json catalog_to_json(const Catalog& catalog) {
  nlohmann::json types = nlohmann::json::array();
  for (const auto& t : catalog.types()) {
    types.push_back({{"name", t.name},
                     {"transmission_period_ms", t.transmission_period_ms},
                     {"frame_size_bytes", t.frame_size_bytes},
                     {"latency_bound_ms", t.latency_bound_ms},
                     {"reliability_plr", t.reliability_plr},
                     {"device_density", t.device_density},
                     {"communication_range", t.communication_range},
                     {"mobility", t.mobility}});
  }
  return {{"types", types}, {"type_probabilities", catalog.type_probabilities()}};
}

}  // namespace qslice
