#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qslice {

/// One IoT device class. `transmission_period_ms` is the time between two
/// frames of a legitimate device (the factory-automation table lists it under
/// "transmission frequency" but in milliseconds, so it is a period).
struct DeviceTypeSpec {
  std::size_t id = 0;
  std::string name;
  double transmission_period_ms = 0.0;
  std::uint32_t frame_size_bytes = 0;
  // Metadata only; nothing below is used by any computation.
  double latency_bound_ms = 0.0;
  double reliability_plr = 0.0;
  std::string device_density;
  std::string communication_range;
  std::string mobility;
};

/// Legitimate data rate in bit/s: frame_size * 8 / period.
double legit_rate(const DeviceTypeSpec& spec);

/// Device types plus the probability that a device belongs to each.
/// Immutable after construction.
class Catalog {
 public:
  Catalog(std::vector<DeviceTypeSpec> types, std::vector<double> type_probabilities);

  std::size_t size() const { return types_.size(); }
  const std::vector<DeviceTypeSpec>& types() const { return types_; }
  const std::vector<double>& type_probabilities() const { return probabilities_; }
  const DeviceTypeSpec& type(std::size_t i) const { return types_.at(i); }
  double probability(std::size_t i) const { return probabilities_.at(i); }
  double rate(std::size_t i) const { return legit_rate(types_.at(i)); }

  /// Same types, different mixture.
  Catalog with_probabilities(std::vector<double> type_probabilities) const;

 private:
  std::vector<DeviceTypeSpec> types_;
  std::vector<double> probabilities_;
};

/// Manufacturing cell, machine tools, printing machines, packaging machines;
/// uniform type probabilities.
Catalog builtin_factory_catalog();

/// Probability-weighted mean legitimate rate in bit/s.
double mean_rate(const Catalog& catalog);

Catalog catalog_from_json(const nlohmann::json& doc);
nlohmann::json catalog_to_json(const Catalog& catalog);

}  // namespace qslice
