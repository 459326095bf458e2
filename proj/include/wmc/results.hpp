#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace wmc {

std::string version() noexcept;

// One CSV file per record kind. The first line is a '#' comment carrying the
// code version and config hash, then one header row, then data rows. Rows are
// flushed as they are written so a failed run keeps what it produced.
class CsvSink {
 public:
  CsvSink() = default;
  CsvSink(const std::string& path, const std::string& kind, std::uint64_t config_hash,
          std::vector<std::string> columns);

  bool is_open() const noexcept { return out_.is_open(); }
  const std::string& path() const noexcept { return path_; }
  void row(const std::vector<std::string>& fields);

 private:
  std::string path_;
  std::size_t width_ = 0;
  std::ofstream out_;
};

std::string fmt(double v);
std::string fmt(long long v);
std::string hex_hash(std::uint64_t h);

}  // namespace wmc
