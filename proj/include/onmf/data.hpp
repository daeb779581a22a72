#pragma once

#include "onmf/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace onmf {

enum class CaseType { Confirmed, Deaths, Recovered };

std::string to_string(CaseType type);
// Accepts "confirmed", "deaths"/"death", "recovered". Throws ConfigError.
CaseType parse_case_type(std::string_view text);

// M/D/YY (or M/D/YYYY) as used in the CSSE time-series headers.
Date parse_us_date(std::string_view text);
std::string format_iso_date(Date date);

struct CaseRow {
  std::string province;
  std::string country;
  std::vector<std::int64_t> counts;  // cumulative, one per date
};

// Cumulative counts in the CSSE global time-series layout: Province/State,
// Country/Region, Lat, Long, then one column per day.
struct RawCaseTable {
  CaseType case_type = CaseType::Confirmed;
  std::vector<Date> dates;
  std::vector<CaseRow> rows;
};

RawCaseTable parse_case_csv(std::istream& in, CaseType type, const std::string& source = "<stream>");
RawCaseTable load_case_csv(const std::filesystem::path& path, CaseType type);

// Sums province rows into one row per country (province left empty), in
// order of first appearance.
RawCaseTable aggregate_countries(const RawCaseTable& table);

struct DailySeries {
  std::vector<double> values;
  std::size_t clamped_cells = 0;
  double clamped_mass = 0.0;  // total magnitude of negative differences zeroed
};

// First difference of a cumulative series; day 0 keeps the day-0 count and
// negative differences are clamped to zero.
DailySeries to_daily_new(std::span<const std::int64_t> cumulative);

struct LabeledSeries {
  std::string entity;
  std::string case_type;
  Date start{};
  std::vector<double> values;
};

// Daily-new series for every country of a table (provinces summed).
std::vector<LabeledSeries> to_daily_new(const RawCaseTable& table);

// Stacks the requested series into a panel, case-type-major: row
// c * countries.size() + e holds (countries[e], case_types[c]). Throws
// Error when a series is missing and DimensionError on a date-range
// mismatch.
TimeSeriesPanel assemble_panel(const std::vector<LabeledSeries>& series,
                               const std::vector<std::string>& countries,
                               const std::vector<std::string>& case_types);

enum class SmoothingAlignment { Trailing, Centered };

struct TransformSpec {
  Index smoothing_window = 5;
  double log_offset = 1.0;
  SmoothingAlignment alignment = SmoothingAlignment::Trailing;

  void validate() const;
};

// Row-wise moving average over the window ending at t (trailing) or centred
// on t; windows are truncated at the panel edges.
TimeSeriesPanel smooth_moving_average(const TimeSeriesPanel& panel, Index window,
                                      SmoothingAlignment alignment = SmoothingAlignment::Trailing);

// x -> log(x + offset); throws DomainError on entries below zero.
Matrix log_transform(const Matrix& values, double offset = 1.0);
// y -> exp(y) - offset.
double inverse_log_value(double y, double offset = 1.0);
Matrix inverse_log_transform(const Matrix& values, double offset = 1.0);
TimeSeriesPanel log_transform(const TimeSeriesPanel& panel, double offset = 1.0);

// Smoothing followed by the log map.
TimeSeriesPanel apply_transform(const TimeSeriesPanel& panel, const TransformSpec& spec);

// Tidy export: date,country,case_type,value.
void write_tidy_csv(const TimeSeriesPanel& panel, std::ostream& out);

// Splits one CSV record, honouring double quotes.
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace onmf
