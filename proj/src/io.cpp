#include "gjr/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "gjr/errors.hpp"

namespace gjr::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double x = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(x)) return std::nullopt;
  return x;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t require_column(const CsvTable& t, const std::string& name, const std::string& path) {
  const auto c = t.column(name);
  if (!c) throw DataError(path + ": missing column '" + name + "'");
  return *c;
}

void reject(IngestReport& report, std::size_t line, std::string reason) {
  report.rejected.push_back({line, std::move(reason)});
}

// Field value or a rejection reason.
struct Field {
  const std::vector<std::string>& row;
  std::string error;

  std::optional<double> number(std::size_t col, const char* name) {
    if (col >= row.size()) {
      error = std::string("missing ") + name;
      return std::nullopt;
    }
    const auto x = parse_number(row[col]);
    if (!x) error = std::string("bad ") + name + " '" + row[col] + "'";
    return x;
  }
  std::optional<Date> date(std::size_t col, const char* name) {
    if (col >= row.size()) {
      error = std::string("missing ") + name;
      return std::nullopt;
    }
    const auto d = parse_iso_date(row[col]);
    if (!d) error = std::string("bad ") + name + " '" + row[col] + "'";
    return d;
  }
};

std::string strip_prefix(const std::string& msg) {
  const auto p = msg.find(": ");
  return p == std::string::npos ? msg : msg.substr(p + 2);
}

}  // namespace

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  const std::string key = lower(name);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (lower(header[i]) == key) return i;
  return std::nullopt;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (!have_header) {
      t.header = split_record(s);
      have_header = true;
      continue;
    }
    t.rows.push_back(split_record(s));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw DataError("csv: no header line");
  return t;
}

CsvTable read_csv(const std::string& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + strip_prefix(e.what()));
  }
}

PriceTable ingest_price_table(const std::string& path, IngestReport* report_out) {
  IngestReport report;
  report.path = path;
  const CsvTable t = read_csv(path);
  const std::size_t cd = require_column(t, "date", path);
  const std::size_t cc = require_column(t, "close", path);

  std::vector<std::tuple<Date, double, std::size_t>> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Field f{t.rows[i], {}};
    const auto d = f.date(cd, "date");
    const auto c = d ? f.number(cc, "close") : std::nullopt;
    if (!d || !c) {
      reject(report, t.lines[i], f.error);
      continue;
    }
    if (!(*c > 0.0)) {
      reject(report, t.lines[i], "close must be positive");
      continue;
    }
    rows.emplace_back(*d, *c, t.lines[i]);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  PriceTable out;
  for (const auto& [d, c, line] : rows) {
    if (!out.dates.empty() && out.dates.back() == d) {
      reject(report, line, "duplicate date " + format_iso_date(d));
      continue;
    }
    out.dates.push_back(d);
    out.closes.push_back(c);
  }
  report.accepted = out.closes.size();
  if (report_out) *report_out = report;
  if (out.closes.empty()) throw DataError(path + ": no valid price rows");
  return out;
}

ReturnSeries ingest_prices(const std::string& path, double dt, IngestReport* report) {
  const PriceTable t = ingest_price_table(path, report);
  return returns_from_prices(t.closes, dt, t.dates);
}

std::vector<OptionQuote> ingest_chain(const std::string& path, const ChainOptions& options, IngestReport* report_out) {
  IngestReport report;
  report.path = path;
  const CsvTable t = read_csv(path);
  const std::size_t cq = require_column(t, "quote_date", path);
  const std::size_t ce = require_column(t, "expiry", path);
  const std::size_t ck = require_column(t, "strike", path);
  const std::size_t ct = require_column(t, "kind", path);
  const std::size_t cb = require_column(t, "bid", path);
  const std::size_t ca = require_column(t, "ask", path);
  const std::size_t cs = require_column(t, "spot", path);
  const auto cr = t.column("rf");
  if (!cr && !options.constant_rf) throw ConfigError(path + ": no rf column and no constant rate given");

  std::vector<std::pair<OptionQuote, std::size_t>> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    Field f{row, {}};
    OptionQuote q;
    const auto qd = f.date(cq, "quote_date");
    const auto ed = qd ? f.date(ce, "expiry") : std::nullopt;
    const auto k = ed ? f.number(ck, "strike") : std::nullopt;
    const auto b = k ? f.number(cb, "bid") : std::nullopt;
    const auto a = b ? f.number(ca, "ask") : std::nullopt;
    const auto s = a ? f.number(cs, "spot") : std::nullopt;
    if (!s) {
      reject(report, t.lines[i], f.error);
      continue;
    }
    const std::string kind = ct < row.size() ? lower(row[ct]) : std::string();
    if (kind == "call" || kind == "c") {
      q.kind = OptionKind::call;
    } else if (kind == "put" || kind == "p") {
      q.kind = OptionKind::put;
    } else {
      reject(report, t.lines[i], "bad kind '" + kind + "'");
      continue;
    }
    if (options.constant_rf) {
      q.rf = *options.constant_rf;
    } else {
      const auto r = f.number(*cr, "rf");
      if (!r) {
        reject(report, t.lines[i], f.error);
        continue;
      }
      q.rf = *r;
    }
    q.quote_date = *qd;
    q.expiry_date = *ed;
    q.strike = *k;
    q.bid = *b;
    q.ask = *a;
    q.mid = 0.5 * (*b + *a);
    q.spot = *s;
    try {
      q.validate();
    } catch (const DataError& e) {
      reject(report, t.lines[i], strip_prefix(e.what()));
      continue;
    }
    rows.emplace_back(q, t.lines[i]);
  }
  const auto key = [](const OptionQuote& q) {
    return std::tuple(q.quote_date, q.expiry_date, static_cast<int>(q.kind), q.strike);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return key(a.first) < key(b.first); });
  std::vector<OptionQuote> out;
  for (const auto& [q, line] : rows) {
    if (!out.empty() && key(out.back()) == key(q)) {
      reject(report, line, "duplicate contract");
      continue;
    }
    out.push_back(q);
  }
  report.accepted = out.size();
  if (report_out) *report_out = report;
  if (out.empty()) throw DataError(path + ": no valid option rows");
  return out;
}

FactorPanel ingest_factors(const std::string& path, FactorUnits units, IngestReport* report_out) {
  IngestReport report;
  report.path = path;
  const CsvTable t = read_csv(path);
  const std::size_t cd = require_column(t, "date", path);
  const char* names[] = {"Mkt-RF", "SMB", "HML", "RMW", "CMA", "RF"};
  std::size_t cols[6];
  for (int j = 0; j < 6; ++j) cols[j] = require_column(t, names[j], path);
  const double scale = units == FactorUnits::percent ? 0.01 : 1.0;

  std::vector<std::pair<Date, std::array<double, 6>>> rows;
  std::vector<std::size_t> lines;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Field f{t.rows[i], {}};
    const auto d = f.date(cd, "date");
    std::array<double, 6> v{};
    bool ok = d.has_value();
    for (int j = 0; ok && j < 6; ++j) {
      const auto x = f.number(cols[j], names[j]);
      if (!x) ok = false;
      else v[j] = *x * scale;
    }
    if (!ok) {
      reject(report, t.lines[i], f.error);
      continue;
    }
    rows.emplace_back(*d, v);
    lines.push_back(t.lines[i]);
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].first < rows[b].first; });
  FactorPanel p;
  for (std::size_t i : order) {
    const auto& [d, v] = rows[i];
    if (!p.dates.empty() && p.dates.back() == d) {
      reject(report, lines[i], "duplicate date " + format_iso_date(d));
      continue;
    }
    p.dates.push_back(d);
    p.mkt_rf.push_back(v[0]);
    p.smb.push_back(v[1]);
    p.hml.push_back(v[2]);
    p.rmw.push_back(v[3]);
    p.cma.push_back(v[4]);
    p.rf.push_back(v[5]);
  }
  report.accepted = p.size();
  if (report_out) *report_out = report;
  if (p.size() == 0) throw DataError(path + ": no valid factor rows");
  return p;
}

Settings parse_settings(const std::string& text) {
  Settings out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (value.is_string()) out[key] = value.get<std::string>();
      else if (value.is_number() || value.is_boolean()) out[key] = value.dump();
      else throw ConfigError("config: value of '" + key + "' must be a string, number or boolean");
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(s.substr(eq + 1));
  }
  return out;
}

Settings load_settings(const std::string& path) { return parse_settings(read_file(path)); }

std::string canonical_json(const Settings& settings) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : settings) j[k] = v;
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const Settings& settings) {
  const std::uint64_t h = fnv1a64(canonical_json(settings));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string version() { return GJR_VERSION; }

std::string header_comment(const ArtifactMeta& meta) {
  return "# gjr " + version() + " command=" + meta.command + " config_hash=" + meta.config_hash +
         " seed=" + std::to_string(meta.seed) + "\n";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

CsvWriter::CsvWriter(const std::string& path, const ArtifactMeta& meta, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  buffer_ = header_comment(meta);
  for (std::size_t i = 0; i < columns.size(); ++i) buffer_ += (i ? "," : "") + columns[i];
  buffer_ += '\n';
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (in_row_ == columns_) throw InvalidArgument("CsvWriter: too many cells in row");
  if (in_row_++) buffer_ += ',';
  if (s.find_first_of(",\"\n") != std::string::npos) {
    buffer_ += '"';
    for (char c : s) buffer_ += c == '"' ? std::string("\"\"") : std::string(1, c);
    buffer_ += '"';
  } else {
    buffer_ += s;
  }
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }
CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw InvalidArgument("CsvWriter: row has the wrong number of cells");
  buffer_ += '\n';
  in_row_ = 0;
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path_);
  out << buffer_;
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

void write_json(const std::string& path, const ArtifactMeta& meta, nlohmann::json body) {
  body["meta"] = {{"version", version()}, {"command", meta.command}, {"config_hash", meta.config_hash},
                  {"seed", meta.seed}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << body.dump(2) << '\n';
}

nlohmann::json report_json(const IngestReport& report) {
  nlohmann::json rej = nlohmann::json::array();
  for (const auto& r : report.rejected) rej.push_back({{"line", r.line}, {"reason", r.reason}});
  return {{"path", report.path}, {"accepted", report.accepted}, {"rejected", rej}};
}

}  // namespace gjr::io
