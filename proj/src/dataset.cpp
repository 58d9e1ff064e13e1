#include "diffdp/dataset.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "diffdp/error.hpp"

namespace diffdp {

std::size_t TimeGridDataset::num_observations() const {
  std::size_t n = 0;
  for (const auto& group : values) n += group.size();
  return n;
}

void TimeGridDataset::validate() const {
  if (times.empty()) throw DataError("dataset has no observations");
  if (times.size() != values.size()) throw DataError("dataset times/values size mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw DataError("non-finite time at index " + std::to_string(i));
    if (i > 0 && !(times[i] > times[i - 1]))
      throw DataError("times must be strictly increasing (index " + std::to_string(i) + ")");
    if (values[i].empty()) throw DataError("time index " + std::to_string(i) + " has no values");
    for (double y : values[i])
      if (!std::isfinite(y)) throw DataError("non-finite value at time index " + std::to_string(i));
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, std::size_t line) {
  double x = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(x))
    throw DataError("line " + std::to_string(line) + ": cannot parse number '" + field + "'");
  return x;
}

double parse_date_days(const std::string& field, std::size_t line) {
  int y = 0;
  unsigned m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  if (std::sscanf(field.c_str(), "%d%c%u%c%u", &y, &dash1, &m, &dash2, &d) != 5 || dash1 != '-' ||
      dash2 != '-')
    throw DataError("line " + std::to_string(line) + ": cannot parse date '" + field + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw DataError("line " + std::to_string(line) + ": invalid date '" + field + "'");
  return static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

}  // namespace

TimeGridDataset read_dataset_csv(std::istream& in, const CsvOptions& options) {
  TimeGridDataset data;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  double origin = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "time,value")
        throw DataError("line " + std::to_string(line_no) + ": expected header 'time,value'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw DataError("line " + std::to_string(line_no) + ": expected two comma-separated fields");
    const std::string tfield = trim(line.substr(0, comma));
    const std::string yfield = trim(line.substr(comma + 1));
    double t = options.date_time ? parse_date_days(tfield, line_no) : parse_number(tfield, line_no);
    const double y = parse_number(yfield, line_no);
    if (options.date_time) {
      if (data.times.empty()) origin = t;
      t -= origin;
    }
    if (!data.times.empty() && t < data.times.back())
      throw DataError("line " + std::to_string(line_no) + ": time " + tfield +
                      " is earlier than the previous row; rows must be sorted by time");
    if (data.times.empty() || t > data.times.back()) {
      data.times.push_back(t);
      data.values.emplace_back();
    }
    data.values.back().push_back(y);
  }
  if (!header_seen) throw DataError("missing header 'time,value'");
  data.validate();
  return data;
}

TimeGridDataset read_dataset_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return read_dataset_csv(in, options);
}

void write_dataset_csv(std::ostream& out, const TimeGridDataset& data) {
  out << "time,value\n";
  for (std::size_t i = 0; i < data.times.size(); ++i)
    for (double y : data.values[i]) out << format_double(data.times[i]) << ',' << format_double(y) << '\n';
}

void write_dataset_csv(const std::filesystem::path& path, const TimeGridDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  write_dataset_csv(out, data);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace diffdp
