#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "ntl/domain.hpp"

namespace ntl {

inline constexpr const char* kConsumptionHeader = "customer_id,reading_date,kwh_increase,days_since_prev";
inline constexpr const char* kInspectionsHeader = "customer_id,inspection_date,label";

/// Parameters of the synthetic stand-in for a utility's inspection history.
struct SynthConfig {
  std::size_t n_customers = 1000;
  std::size_t months = 24;
  double ntl_fraction = 0.1;
  std::pair<double, double> base_consumption_range{4.0, 30.0};  // kWh/day
  std::pair<double, double> theft_drop_factor_range{0.2, 0.6};
  double seasonality_amplitude = 0.15;
  double noise_sigma = 0.08;
  std::uint64_t seed = 42;
  Date start_date{2011, 1, 1};

  /// Throws ConfigError naming the first broken invariant.
  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

/// Parses both CSV files. Throws ParseError (with the offending line) on
/// malformed rows and ValidationError when the assembled dataset breaks an
/// invariant.
Dataset load_dataset(const std::filesystem::path& consumption_path, const std::filesystem::path& inspections_path);
Dataset read_dataset(std::istream& consumption, std::istream& inspections);

void save_dataset(const Dataset& dataset, const std::filesystem::path& consumption_path,
                  const std::filesystem::path& inspections_path);
void write_dataset(const Dataset& dataset, std::ostream& consumption, std::ostream& inspections);

/// Seeded generator. NTL customers get a sustained multiplicative drop in
/// consumption that starts a few months before their inspection.
Dataset generate_synthetic(const SynthConfig& config);

/// Whole file as text; throws Error when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed; throws Error on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace ntl
