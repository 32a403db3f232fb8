#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "gjr/io.hpp"

namespace gjr::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

// Merged settings of one command: config file values overridden by flags.
struct RunConfig {
  std::string command;  // simulate, estimate, price, calibrate, fit-driver
  io::Settings settings;
  std::string output_dir;  // "out" setting, else $GJR_OUTPUT_DIR, else "."

  // Typed access; a present but malformed value throws ConfigError.
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t seed() const;
  // Hash of every setting except the output location.
  std::string hash() const;
};

// Runs one command, writing artifacts under config.output_dir. Numerical
// failures still write the summary computed so far, with a status field.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// gjr <simulate|estimate|price|calibrate|fit-driver> [--config FILE] [--key value ...]
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gjr::cli
