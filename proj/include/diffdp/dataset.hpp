#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace diffdp {

// Observations grouped by strictly increasing time; every time carries at
// least one value.
struct TimeGridDataset {
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  std::size_t num_times() const { return times.size(); }
  std::size_t num_observations() const;
  // DataError on an empty grid, non-increasing times or an empty group.
  void validate() const;
};

struct CsvOptions {
  // Parse the time column as ISO dates (YYYY-MM-DD) and map them to day
  // offsets from the first row.
  bool date_time = false;
};

// CSV with header `time,value`; repeated time rows form one group. Rows must be
// sorted by time; DataError names the offending line otherwise.
TimeGridDataset read_dataset_csv(std::istream& in, const CsvOptions& options = {});
TimeGridDataset read_dataset_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_dataset_csv(std::ostream& out, const TimeGridDataset& data);
void write_dataset_csv(const std::filesystem::path& path, const TimeGridDataset& data);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

}  // namespace diffdp
