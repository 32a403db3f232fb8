#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gjr/calibration.hpp"
#include "gjr/date.hpp"
#include "gjr/estimation.hpp"
#include "gjr/market_driver.hpp"

namespace gjr::io {

struct Rejection {
  std::size_t line = 0;  // 1-based line in the file, header is line 1
  std::string reason;
};

struct IngestReport {
  std::string path;
  std::size_t accepted = 0;
  std::vector<Rejection> rejected;
};

// Header-addressed CSV table. Blank lines and lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row

  // Column index by case-insensitive name; nullopt when absent.
  std::optional<std::size_t> column(const std::string& name) const;
};

// Throws ConfigError when the file cannot be opened, DataError when it has no header.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

struct PriceTable {
  std::vector<Date> dates;
  std::vector<double> closes;
};

// Columns date, close. Rows are sorted by date; a repeated date keeps its first row.
PriceTable ingest_price_table(const std::string& path, IngestReport* report = nullptr);
ReturnSeries ingest_prices(const std::string& path, double dt = 1.0 / 252.0, IngestReport* report = nullptr);

struct ChainOptions {
  // Used for every row when set, and for rows without an rf value otherwise.
  std::optional<double> constant_rf;
};

// Columns quote_date, expiry, strike, kind (call/put or C/P), bid, ask, spot and
// an optional rf. mid = (bid + ask)/2. Rows failing OptionQuote::validate are
// rejected with its reason (e.g. "crossed quote (bid > ask)").
std::vector<OptionQuote> ingest_chain(const std::string& path, const ChainOptions& options = {},
                                      IngestReport* report = nullptr);

enum class FactorUnits { decimal, percent };

// Columns date, Mkt-RF, SMB, HML, RMW, CMA, RF; percent units are divided by 100.
FactorPanel ingest_factors(const std::string& path, FactorUnits units, IngestReport* report = nullptr);

// Flat string settings. A file is read as a JSON object when its first
// non-blank character is '{', otherwise as key=value lines ('#' comments).
using Settings = std::map<std::string, std::string>;
Settings load_settings(const std::string& path);
Settings parse_settings(const std::string& text);

// Sorted-key JSON object of the settings.
std::string canonical_json(const Settings& settings);
std::uint64_t fnv1a64(std::string_view bytes);
// FNV-1a 64 of the canonical JSON, 16 hex digits.
std::string config_hash(const Settings& settings);

struct ArtifactMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;
};

std::string version();

// Header comment lines: "# gjr <version> command=... config_hash=... seed=...".
std::string header_comment(const ArtifactMeta& meta);

// Writes the header comment, the column line and the rows. Doubles are printed
// with 17 significant digits so re-runs are byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const ArtifactMeta& meta, const std::vector<std::string>& columns);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  void end_row();
  void close();
  ~CsvWriter();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
  bool closed_ = false;
};

std::string format_double(double x);

// Writes body with "meta": {version, command, config_hash, seed} added.
void write_json(const std::string& path, const ArtifactMeta& meta, nlohmann::json body);

nlohmann::json report_json(const IngestReport& report);

}  // namespace gjr::io
