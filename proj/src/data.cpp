#include "ntl/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/error.hpp"
#include "ntl/random.hpp"

namespace ntl {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_real(std::string_view text, std::size_t line, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    throw ParseError(std::string(what) + " is not a finite number: '" + std::string(text) + "'", line);
  return v;
}

long parse_integer(std::string_view text, std::size_t line, const char* what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(std::string(what) + " is not an integer: '" + std::string(text) + "'", line);
  return v;
}

Date parse_date(std::string_view text, std::size_t line) {
  try {
    return Date::parse(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
}

std::string parse_id(std::string_view text, std::size_t line) {
  if (!is_valid_identifier(text))
    throw ParseError("customer_id must match [A-Za-z0-9_-]+: '" + std::string(text) + "'", line);
  return std::string(text);
}

void expect_header(std::istream& in, const char* header, const char* file) {
  std::string line;
  if (!read_line(in, line)) throw ParseError(std::string(file) + " file is empty; expected header", 1);
  if (line != header) throw ParseError(std::string(file) + " header must be '" + header + "'", 1);
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open '" + p.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + p.string() + "' for writing");
  return out;
}

double round_to_cents(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto out = open_out(path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("synthetic config: " + m); };
  if (n_customers == 0) fail("n_customers must be positive");
  if (months == 0) fail("months must be positive");
  if (!(ntl_fraction >= 0.0 && ntl_fraction <= 1.0)) fail("ntl_fraction must lie in [0,1]");
  const auto [bmin, bmax] = base_consumption_range;
  if (!(bmin >= 0.0 && bmin <= bmax && std::isfinite(bmax)))
    fail("base_consumption_range must satisfy 0 <= min <= max");
  const auto [dmin, dmax] = theft_drop_factor_range;
  if (!(dmin > 0.0 && dmin <= dmax && dmax < 1.0)) fail("theft_drop_factor_range must satisfy 0 < min <= max < 1");
  if (!(seasonality_amplitude >= 0.0 && std::isfinite(seasonality_amplitude)))
    fail("seasonality_amplitude must be >= 0");
  if (!(noise_sigma >= 0.0 && std::isfinite(noise_sigma))) fail("noise_sigma must be >= 0");
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"n_customers", c.n_customers},
                     {"months", c.months},
                     {"ntl_fraction", c.ntl_fraction},
                     {"base_consumption_range", {c.base_consumption_range.first, c.base_consumption_range.second}},
                     {"theft_drop_factor_range", {c.theft_drop_factor_range.first, c.theft_drop_factor_range.second}},
                     {"seasonality_amplitude", c.seasonality_amplitude},
                     {"noise_sigma", c.noise_sigma},
                     {"seed", c.seed},
                     {"start_date", c.start_date.iso()}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  SynthConfig d;
  c.n_customers = j.value("n_customers", d.n_customers);
  c.months = j.value("months", d.months);
  c.ntl_fraction = j.value("ntl_fraction", d.ntl_fraction);
  auto range = [&](const char* key, std::pair<double, double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ConfigError(std::string(key) + " must be a [min, max] pair");
    return std::pair<double, double>{r[0].get<double>(), r[1].get<double>()};
  };
  c.base_consumption_range = range("base_consumption_range", d.base_consumption_range);
  c.theft_drop_factor_range = range("theft_drop_factor_range", d.theft_drop_factor_range);
  c.seasonality_amplitude = j.value("seasonality_amplitude", d.seasonality_amplitude);
  c.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  c.seed = j.value("seed", d.seed);
  c.start_date = j.contains("start_date") ? Date::parse(j.at("start_date").get<std::string>()) : d.start_date;
}

Dataset read_dataset(std::istream& consumption, std::istream& inspections) {
  Dataset ds;
  std::string line;

  expect_header(consumption, kConsumptionHeader, "consumption");
  for (std::size_t lineno = 2; read_line(consumption, line); ++lineno) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 4) throw ParseError("expected 4 fields, found " + std::to_string(f.size()), lineno);
    MeterReading r;
    std::string id = parse_id(f[0], lineno);
    r.reading_date = parse_date(f[1], lineno);
    r.kwh_increase = parse_real(f[2], lineno, "kwh_increase");
    if (r.kwh_increase < 0.0) throw ParseError("kwh_increase must be >= 0, got " + std::string(f[2]), lineno);
    const long days = parse_integer(f[3], lineno, "days_since_prev");
    if (days < 1) throw ParseError("days_since_prev must be >= 1, got " + std::string(f[3]), lineno);
    r.days_since_prev = static_cast<int>(days);
    auto& s = ds.series[id];
    s.customer_id = std::move(id);
    s.readings.push_back(r);
  }

  expect_header(inspections, kInspectionsHeader, "inspections");
  for (std::size_t lineno = 2; read_line(inspections, line); ++lineno) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) throw ParseError("expected 3 fields, found " + std::to_string(f.size()), lineno);
    InspectionResult insp;
    insp.customer_id = parse_id(f[0], lineno);
    insp.inspection_date = parse_date(f[1], lineno);
    if (f[2] != "0" && f[2] != "1") throw ParseError("label must be 0 or 1, got '" + std::string(f[2]) + "'", lineno);
    insp.label = f[2] == "1" ? 1 : 0;
    ds.inspections.push_back(std::move(insp));
  }

  if (auto violations = validate_dataset(ds); !violations.empty()) {
    std::vector<std::string> text;
    text.reserve(violations.size());
    for (const auto& v : violations) text.push_back(v.describe());
    throw ValidationError(std::move(text));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& consumption_path, const std::filesystem::path& inspections_path) {
  auto c = open_in(consumption_path);
  auto i = open_in(inspections_path);
  return read_dataset(c, i);
}

void write_dataset(const Dataset& dataset, std::ostream& consumption, std::ostream& inspections) {
  consumption << kConsumptionHeader << '\n';
  for (const auto& [id, series] : dataset.series)
    for (const auto& r : series.readings)
      consumption << id << ',' << r.reading_date.iso() << ',' << format_double(r.kwh_increase) << ','
                  << r.days_since_prev << '\n';
  inspections << kInspectionsHeader << '\n';
  for (const auto& insp : dataset.inspections)
    inspections << insp.customer_id << ',' << insp.inspection_date.iso() << ',' << insp.label << '\n';
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& consumption_path,
                  const std::filesystem::path& inspections_path) {
  auto c = open_out(consumption_path);
  auto i = open_out(inspections_path);
  write_dataset(dataset, c, i);
  c.flush();
  i.flush();
  if (!c || !i) throw Error("I/O failure while writing dataset");
}

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t n = config.n_customers;
  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.ntl_fraction));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<char> positive(n, 0);
  for (std::size_t k = 0; k < n_pos; ++k) positive[order[k]] = 1;

  const std::size_t width = std::max<std::size_t>(6, std::to_string(n).size());
  const int first_month = config.start_date.month_index();
  const int months = static_cast<int>(config.months);

  Dataset ds;
  for (std::size_t c = 0; c < n; ++c) {
    std::string id = std::to_string(c);
    id = "C" + std::string(width - id.size(), '0') + id;

    const double base = rng.uniform(config.base_consumption_range.first, config.base_consumption_range.second);
    const double phase = rng.uniform(0.0, 12.0);
    const int reading_day = static_cast<int>(rng.between(4, 24));
    int drop_start = months;
    double drop = 1.0;
    if (positive[c]) {
      drop_start = static_cast<int>(rng.between(std::max(0, months - 9), months - 1));
      drop = rng.uniform(config.theft_drop_factor_range.first, config.theft_drop_factor_range.second);
    }

    ConsumptionSeries series;
    series.customer_id = id;
    Date prev = Date::first_of_month(first_month - 1).plus_days(reading_day - 1);
    for (int m = 0; m < months; ++m) {
      const int jitter = static_cast<int>(rng.between(-3, 3));
      const Date date = Date::first_of_month(first_month + m).plus_days(reading_day - 1 + jitter);
      const int days = days_between(prev, date);
      const double season =
          1.0 + config.seasonality_amplitude *
                    std::sin(2.0 * std::numbers::pi * (static_cast<double>(date.month()) + phase) / 12.0);
      const double level = m >= drop_start ? drop : 1.0;
      const double noise = std::max(0.0, 1.0 + config.noise_sigma * rng.normal());
      const double kwh = round_to_cents(base * season * level * noise * days);
      series.readings.push_back({date, kwh, days});
      prev = date;
    }
    ds.series.emplace(id, std::move(series));

    const Date inspected = Date::first_of_month(first_month + months).plus_days(static_cast<int>(rng.between(0, 14)));
    ds.inspections.push_back({std::move(id), inspected, positive[c] ? 1 : 0});
  }
  return ds;
}

}  // namespace ntl
