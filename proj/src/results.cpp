#include "wmc/results.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wmc/error.hpp"

namespace wmc {

std::string version() noexcept { return WMC_VERSION_STRING; }

CsvSink::CsvSink(const std::string& path, const std::string& kind, std::uint64_t config_hash,
                 std::vector<std::string> columns)
    : path_(path), width_(columns.size()) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  out_.open(path, std::ios::trunc);
  if (!out_) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out_ << "# wmc " << version() << " kind=" << kind << " config_hash=" << hex_hash(config_hash) << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
  out_.flush();
}

void CsvSink::row(const std::vector<std::string>& fields) {
  require(fields.size() == width_, "CSV row width does not match the header");
  for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << "\n";
  out_.flush();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(long long v) { return std::to_string(v); }

std::string hex_hash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wmc
