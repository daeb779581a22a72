#include "onmf/data.hpp"

#include "onmf/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace onmf {

std::string to_string(CaseType type) {
  switch (type) {
    case CaseType::Confirmed: return "confirmed";
    case CaseType::Deaths: return "deaths";
    case CaseType::Recovered: return "recovered";
  }
  return "unknown";
}

CaseType parse_case_type(std::string_view text) {
  if (text == "confirmed") return CaseType::Confirmed;
  if (text == "deaths" || text == "death") return CaseType::Deaths;
  if (text == "recovered") return CaseType::Recovered;
  throw ConfigError("case_type", "unknown case type '" + std::string(text) + "'");
}

namespace {

bool parse_int(std::string_view text, int& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Date parse_us_date(std::string_view text) {
  text = trim(text);
  const auto first = text.find('/');
  const auto second = text.find('/', first == std::string_view::npos ? first : first + 1);
  int month = 0, day = 0, year = 0;
  if (first == std::string_view::npos || second == std::string_view::npos ||
      !parse_int(text.substr(0, first), month) ||
      !parse_int(text.substr(first + 1, second - first - 1), day) ||
      !parse_int(text.substr(second + 1), year))
    throw Error("bad date '" + std::string(text) + "'");
  if (year < 100) year += 2000;
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) throw Error("bad date '" + std::string(text) + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_iso_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r' && c != '\n') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

RawCaseTable parse_case_csv(std::istream& in, CaseType type, const std::string& source) {
  constexpr std::size_t kDateColumn = 4;
  RawCaseTable table;
  table.case_type = type;

  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, 0, "missing header row");
  const auto header = split_csv_line(line);
  if (header.size() <= kDateColumn || trim(header[0]).find("Province") == std::string_view::npos ||
      trim(header[1]).find("Country") == std::string_view::npos)
    throw ParseError(source, 1, 0,
                     "header must start with Province/State, Country/Region, Lat, Long and dates");
  for (std::size_t c = kDateColumn; c < header.size(); ++c) {
    Date date{};
    try {
      date = parse_us_date(header[c]);
    } catch (const Error&) {
      throw ParseError(source, 1, c + 1, "unparseable date '" + header[c] + "'");
    }
    if (!table.dates.empty()) {
      if (date <= table.dates.back())
        throw ParseError(source, 1, c + 1, "date column '" + header[c] + "' is out of order");
      if (date != table.dates.back() + std::chrono::days{1})
        throw ParseError(source, 1, c + 1, "date column '" + header[c] + "' leaves a gap");
    }
    table.dates.push_back(date);
  }

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError(source, row_no, 0,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    CaseRow row{std::string(trim(fields[0])), std::string(trim(fields[1])), {}};
    row.counts.reserve(table.dates.size());
    for (std::size_t c = kDateColumn; c < fields.size(); ++c) {
      const auto text = trim(fields[c]);
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || value < 0)
        throw ParseError(source, row_no, c + 1, "bad count '" + std::string(text) + "'");
      row.counts.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw ParseError(source, row_no, 0, "no data rows");
  return table;
}

RawCaseTable load_case_csv(const std::filesystem::path& path, CaseType type) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_case_csv(in, type, path.string());
}

RawCaseTable aggregate_countries(const RawCaseTable& table) {
  RawCaseTable out;
  out.case_type = table.case_type;
  out.dates = table.dates;
  std::map<std::string, std::size_t> index;
  for (const auto& row : table.rows) {
    auto [it, inserted] = index.emplace(row.country, out.rows.size());
    if (inserted) {
      out.rows.push_back(CaseRow{"", row.country, row.counts});
      continue;
    }
    auto& total = out.rows[it->second].counts;
    for (std::size_t c = 0; c < total.size(); ++c) total[c] += row.counts[c];
  }
  return out;
}

DailySeries to_daily_new(std::span<const std::int64_t> cumulative) {
  DailySeries out;
  out.values.reserve(cumulative.size());
  for (std::size_t t = 0; t < cumulative.size(); ++t) {
    const double diff = t == 0 ? static_cast<double>(cumulative[0])
                               : static_cast<double>(cumulative[t] - cumulative[t - 1]);
    if (diff < 0.0) {
      ++out.clamped_cells;
      out.clamped_mass += -diff;
      out.values.push_back(0.0);
    } else {
      out.values.push_back(diff);
    }
  }
  return out;
}

std::vector<LabeledSeries> to_daily_new(const RawCaseTable& table) {
  const RawCaseTable countries = aggregate_countries(table);
  std::vector<LabeledSeries> out;
  std::size_t clamped = 0;
  for (const auto& row : countries.rows) {
    DailySeries daily = to_daily_new(row.counts);
    clamped += daily.clamped_cells;
    out.push_back(LabeledSeries{row.country, to_string(table.case_type),
                                table.dates.empty() ? Date{} : table.dates.front(),
                                std::move(daily.values)});
  }
  if (clamped > 0)
    spdlog::info("{}: clamped {} negative daily differences to zero", to_string(table.case_type), clamped);
  return out;
}

TimeSeriesPanel assemble_panel(const std::vector<LabeledSeries>& series,
                               const std::vector<std::string>& countries,
                               const std::vector<std::string>& case_types) {
  std::map<std::pair<std::string, std::string>, const LabeledSeries*> lookup;
  for (const auto& s : series) lookup.emplace(std::make_pair(s.entity, s.case_type), &s);

  std::vector<const LabeledSeries*> rows;
  std::vector<RowLabel> labels;
  for (const auto& type : case_types) {
    for (const auto& country : countries) {
      auto it = lookup.find({country, type});
      if (it == lookup.end()) throw Error("no series for " + country + "/" + type);
      rows.push_back(it->second);
      labels.push_back(RowLabel{country, type});
    }
  }
  if (rows.empty()) throw DimensionError("assemble_panel: no rows requested");

  const Date start = rows.front()->start;
  const std::size_t length = rows.front()->values.size();
  Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(length));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& s = *rows[r];
    if (s.start != start || s.values.size() != length)
      throw DimensionError("date range of " + s.entity + "/" + s.case_type + " (" +
                           format_iso_date(s.start) + ", " + std::to_string(s.values.size()) +
                           " days) differs from " + format_iso_date(start) + ", " +
                           std::to_string(length) + " days");
    for (std::size_t t = 0; t < length; ++t)
      values(static_cast<Index>(r), static_cast<Index>(t)) = s.values[t];
  }
  return TimeSeriesPanel(std::move(values), std::move(labels), start);
}

void TransformSpec::validate() const {
  if (smoothing_window < 1) throw ConfigError("smoothing_window", "must be >= 1");
  if (!(log_offset > 0.0) || !std::isfinite(log_offset)) throw ConfigError("log_offset", "must be finite and > 0");
}

TimeSeriesPanel smooth_moving_average(const TimeSeriesPanel& panel, Index window,
                                      SmoothingAlignment alignment) {
  if (window < 1) throw DomainError("smooth_moving_average: window must be >= 1");
  const Index T = panel.cols();
  const Matrix& in = panel.values();
  Matrix out(in.rows(), T);
  for (Index t = 0; t < T; ++t) {
    Index lo = t - window + 1;
    Index hi = t;
    if (alignment == SmoothingAlignment::Centered) {
      lo = t - (window - 1) / 2;
      hi = t + window / 2;
    }
    lo = std::max<Index>(lo, 0);
    hi = std::min<Index>(hi, T - 1);
    out.col(t) = in.middleCols(lo, hi - lo + 1).rowwise().mean();
  }
  return panel.with_values(std::move(out));
}

Matrix log_transform(const Matrix& values, double offset) {
  if ((values.array() < 0.0).any()) throw DomainError("log_transform: negative entries");
  const double log_offset = std::log(offset);
  return values.unaryExpr([=](double x) { return log_offset + std::log1p(x / offset); });
}

double inverse_log_value(double y, double offset) {
  return offset * std::expm1(y - std::log(offset));
}

Matrix inverse_log_transform(const Matrix& values, double offset) {
  return values.unaryExpr([=](double y) { return inverse_log_value(y, offset); });
}

TimeSeriesPanel log_transform(const TimeSeriesPanel& panel, double offset) {
  return panel.with_values(log_transform(panel.values(), offset));
}

TimeSeriesPanel apply_transform(const TimeSeriesPanel& panel, const TransformSpec& spec) {
  spec.validate();
  return log_transform(smooth_moving_average(panel, spec.smoothing_window, spec.alignment),
                       spec.log_offset);
}

void write_tidy_csv(const TimeSeriesPanel& panel, std::ostream& out) {
  out << "date,country,case_type,value\n";
  char buf[32];
  for (Index t = 0; t < panel.cols(); ++t) {
    const std::string date = format_iso_date(panel.t0() + std::chrono::days{t});
    for (Index i = 0; i < panel.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", panel.values()(i, t));
      const auto& label = panel.labels()[static_cast<std::size_t>(i)];
      out << date << ',' << csv_escape(label.entity) << ',' << csv_escape(label.case_type) << ','
          << buf << '\n';
    }
  }
}

}  // namespace onmf
