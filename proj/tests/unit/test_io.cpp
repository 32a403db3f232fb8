#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gjr/calibration.hpp"
#include "gjr/cli.hpp"
#include "gjr/errors.hpp"
#include "gjr/io.hpp"

using namespace gjr;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("gjr_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string str(const std::string& name = "") const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gjr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = gjr::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

double field(const std::string& line, const std::string& key) {
  const auto p = line.find(key + "=");
  if (p == std::string::npos) return std::nan("");
  return std::stod(line.substr(p + key.size() + 1));
}

double bs_call(double s, double k, double t, double r, double sigma) {
  const auto n = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * t) / (sigma * std::sqrt(t));
  return s * n(d1) - k * std::exp(-r * t) * n(d1 - sigma * std::sqrt(t));
}

const std::string kFixtures = GJR_FIXTURE_DIR;

}  // namespace

TEST(IngestPrices, ThreeRowsGiveThreePoints) {
  TempDir d;
  const auto path = d.file("p.csv", "date,close\n2021-01-04,100\n2021-01-05,110\n2021-01-06,99\n");
  io::IngestReport report;
  const auto s = io::ingest_prices(path, 1.0 / 252.0, &report);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.cum_log_returns[0], 0.0);
  EXPECT_DOUBLE_EQ(s.cum_log_returns[2], std::log(99.0 / 100.0));
  EXPECT_EQ(report.accepted, 3u);
  EXPECT_TRUE(report.rejected.empty());
}

TEST(IngestPrices, SortsDeduplicatesAndReportsRows) {
  TempDir d;
  const auto path = d.file("p.csv",
                           "# comment\nDate,Close\n2021-01-06,99\n2021-01-04,100\nbad-date,1\n2021-01-05,-3\n"
                           "2021-01-04,101\n2021-01-05,abc\n2021-01-07,98\n");
  io::IngestReport report;
  const auto t = io::ingest_price_table(path, &report);
  ASSERT_EQ(t.closes.size(), 3u);
  EXPECT_EQ(t.closes[0], 100.0);
  EXPECT_EQ(t.closes[1], 99.0);
  EXPECT_EQ(t.closes[2], 98.0);
  ASSERT_EQ(report.rejected.size(), 4u);
  std::vector<std::size_t> lines;
  for (const auto& r : report.rejected) lines.push_back(r.line);
  std::sort(lines.begin(), lines.end());
  EXPECT_EQ(lines, (std::vector<std::size_t>{5, 6, 7, 8}));
}

TEST(IngestPrices, Errors) {
  TempDir d;
  EXPECT_THROW(io::ingest_prices(d.str("missing.csv")), ConfigError);
  EXPECT_THROW(io::ingest_prices(d.file("a.csv", "date,close\nx,1\n")), DataError);
  EXPECT_THROW(io::ingest_prices(d.file("b.csv", "date,price\n2021-01-04,1\n")), DataError);
  EXPECT_THROW(io::ingest_prices(d.file("c.csv", "")), DataError);
}

TEST(IngestChain, CrossedQuoteIsRejected) {
  TempDir d;
  const auto path = d.file("c.csv",
                           "quote_date,expiry,strike,kind,bid,ask,spot,rf\n"
                           "2021-06-01,2021-06-15,420,call,5.0,5.2,419.67,0.0162\n"
                           "2021-06-01,2021-06-15,430,call,3.0,2.5,419.67,0.0162\n"
                           "2021-06-01,2021-06-15,410,P,4.0,4.4,419.67,0.0162\n"
                           "2021-06-01,2021-06-15,400,straddle,4.0,4.4,419.67,0.0162\n");
  io::IngestReport report;
  const auto quotes = io::ingest_chain(path, {}, &report);
  ASSERT_EQ(quotes.size(), 2u);
  EXPECT_EQ(quotes[0].kind, OptionKind::call);
  EXPECT_EQ(quotes[1].kind, OptionKind::put);
  EXPECT_DOUBLE_EQ(quotes[0].mid, 5.1);
  ASSERT_EQ(report.rejected.size(), 2u);
  EXPECT_EQ(report.rejected[0].line, 3u);
  EXPECT_NE(report.rejected[0].reason.find("crossed quote"), std::string::npos) << report.rejected[0].reason;
  EXPECT_NE(report.rejected[1].reason.find("kind"), std::string::npos);
}

TEST(IngestChain, ConstantRateFallback) {
  TempDir d;
  const auto path = d.file("c.csv",
                           "quote_date,expiry,strike,kind,bid,ask,spot\n"
                           "2021-06-01,2021-06-15,420,call,5.0,5.2,419.67\n");
  EXPECT_THROW(io::ingest_chain(path), ConfigError);
  io::ChainOptions opts;
  opts.constant_rf = 0.0162;
  const auto quotes = io::ingest_chain(path, opts);
  ASSERT_EQ(quotes.size(), 1u);
  EXPECT_EQ(quotes[0].rf, 0.0162);
}

TEST(IngestFactors, PercentUnitsAreDividedBy100) {
  const auto panel = io::ingest_factors(kFixtures + "/ff5_factors.csv", io::FactorUnits::percent);
  ASSERT_GT(panel.size(), 1000u);
  for (double rf : panel.rf) EXPECT_NEAR(rf, 0.0162 / 252.0, 1e-17);
  const auto raw = io::ingest_factors(kFixtures + "/ff5_factors.csv", io::FactorUnits::decimal);
  for (std::size_t i = 0; i < panel.size(); i += 97) EXPECT_DOUBLE_EQ(panel.mkt_rf[i] * 100.0, raw.mkt_rf[i]);
  EXPECT_NO_THROW(panel.validate());
}

TEST(Settings, KeyValueAndJsonAgree) {
  const auto a = io::parse_settings("# run\nsigma = 0.2\nmode=exact\n\nn=10\n");
  const auto b = io::parse_settings(R"({"n": 10, "mode": "exact", "sigma": "0.2"})");
  EXPECT_EQ(a, b);
  EXPECT_EQ(io::config_hash(a), io::config_hash(b));
  EXPECT_EQ(io::canonical_json(a), R"({"mode":"exact","n":"10","sigma":"0.2"})");
  auto c = a;
  c["n"] = "11";
  EXPECT_NE(io::config_hash(a), io::config_hash(c));
  EXPECT_THROW(io::parse_settings("sigma 0.2\n"), ConfigError);
  EXPECT_THROW(io::parse_settings(R"({"x": {"y": 1}})"), ConfigError);
  EXPECT_THROW(io::parse_settings("{bad json"), ConfigError);
}

TEST(Settings, Fnv1aKnownVectors) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(io::config_hash({}).size(), 16u);
}

TEST(CsvWriter, HeaderAndRoundTrip) {
  TempDir d;
  const io::ArtifactMeta meta{"0123456789abcdef", 42, "price"};
  {
    io::CsvWriter w(d.str("o.csv"), meta, {"x", "label"});
    w.cell(0.1 + 0.2).cell("a,b");
    w.end_row();
    EXPECT_THROW(w.end_row(), InvalidArgument);
  }
  const auto t = io::read_csv(d.str("o.csv"));
  const std::string text = slurp(d.str("o.csv"));
  EXPECT_EQ(text.rfind("# gjr " + io::version() + " command=price config_hash=0123456789abcdef seed=42\n", 0), 0u);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(std::stod(t.rows[0][0]), 0.1 + 0.2);
  EXPECT_EQ(t.rows[0][1], "a,b");
}

TEST(Cli, PriceMatchesBlackScholesForPlainTree) {
  TempDir d;
  const auto r = run_cli({"price", "--beta", "0", "--n", "1000", "--dt", "0.001", "--s0", "100", "--strike", "100",
                      "--rf", "0.02", "--mu", "0.01", "--out", d.str()});
  ASSERT_EQ(r.code, 0) << r.err;
  const double price = field(r.out, "price");
  const double reference = field(r.out, "bs_reference");
  const double bs = bs_call(100.0, 100.0, 1.0, 0.02, 0.2);
  EXPECT_NEAR(reference, bs, 1e-12);
  EXPECT_LT(std::abs(price / bs - 1.0), 0.005);
  EXPECT_TRUE(fs::exists(d.str("price.json")));
}

TEST(Cli, EstimateRecoversSyntheticSigma) {
  TempDir d;
  const auto r = run_cli({"estimate", "--prices", kFixtures + "/gjr_synthetic.csv", "--out", d.str()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(slurp(d.str("estimate.json")));
  EXPECT_NEAR(summary["median_sigma"].get<double>(), 0.15, 0.015);
  const auto t = io::read_csv(d.str("estimates.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"date", "sigma", "mu", "beta", "alpha", "pvalue"}));
  EXPECT_EQ(t.rows.size(), summary["windows"].get<std::size_t>());
  EXPECT_TRUE(fs::exists(d.str("smoothed.csv")));
}

TEST(Cli, CalibrateSigmaOnManufacturedChainIsFlat) {
  TempDir d;
  CalibrationContext gen;
  gen.mu = 0.119;
  gen.sigma = 0.23;
  gen.beta = -0.978;
  std::ostringstream csv;
  csv << "quote_date,expiry,strike,kind,bid,ask,spot,rf\n";
  for (const char* expiry : {"2021-06-15", "2021-07-01", "2021-08-02"})
    for (double k : {380.0, 400.0, 420.0, 440.0, 460.0}) {
      OptionQuote q;
      q.quote_date = *parse_iso_date("2021-06-01");
      q.expiry_date = *parse_iso_date(expiry);
      q.strike = k;
      q.spot = 419.67;
      q.rf = 0.0162;
      const std::string p = io::format_double(model_price(q, gen));
      csv << "2021-06-01," << expiry << "," << k << ",call," << p << "," << p << ",419.67,0.0162\n";
    }
  const auto chain = d.file("chain.csv", csv.str());
  const auto r = run_cli({"calibrate", "--chain", chain, "--target", "sigma", "--mu", "0.119", "--beta", "-0.978",
                      "--sigma", "0.2", "--out", d.str("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = io::read_csv(d.str("out/surface.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"moneyness", "T_days", "value", "residual", "flag"}));
  ASSERT_EQ(t.rows.size(), 15u);
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[4], "ok");
    EXPECT_NEAR(std::stod(row[2]), 0.23, 1e-6);
  }
}

TEST(Cli, ExitCodes) {
  TempDir d;
  EXPECT_EQ(run_cli({"estimate", "--prices", d.str("none.csv"), "--out", d.str()}).code, gjr::cli::kConfigError);
  EXPECT_EQ(run_cli({"price", "--kind", "straddle", "--out", d.str()}).code, gjr::cli::kConfigError);
  EXPECT_EQ(run_cli({"price", "--n", "ten", "--out", d.str()}).code, gjr::cli::kConfigError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, gjr::cli::kConfigError);
  EXPECT_EQ(run_cli({"--help"}).code, gjr::cli::kOk);
  const auto bad = d.file("bad.csv", "date,close\n2021-01-04,-1\n");
  EXPECT_EQ(run_cli({"estimate", "--prices", bad, "--out", d.str()}).code, gjr::cli::kDataError);
  const auto short_series = d.file("short.csv", "date,close\n2021-01-04,1\n2021-01-05,1.1\n2021-01-06,1.2\n");
  EXPECT_EQ(run_cli({"estimate", "--prices", short_series, "--out", d.str()}).code, gjr::cli::kDataError);

  // Near-zero sigma with a large drift gap: most path probabilities clamp.
  const auto r = run_cli({"price", "--model", "path", "--sigma", "3.44e-5", "--gamma", "0.0422", "--kappa", "6.24",
                      "--v", "0.272", "--rf", "0.02", "--n", "10", "--out", d.str("fail")});
  EXPECT_EQ(r.code, gjr::cli::kNumericalError) << r.err;
  const auto summary = nlohmann::json::parse(slurp(d.str("fail/price.json")));
  EXPECT_EQ(summary["status"], "numerical_failure");
  EXPECT_TRUE(summary.contains("bs_reference"));
}

TEST(Cli, ConfigFileFlagsOverrideAndHashes) {
  TempDir d;
  const auto kv = d.file("run.cfg", "sigma = 0.3\nn = 50\nstrike = 105\n");
  const auto js = d.file("run.json", R"({"sigma": 0.3, "n": 50, "strike": 105})");
  const auto a = run_cli({"price", "--config", kv, "--out", d.str("a")});
  const auto b = run_cli({"price", "--config", js, "--out", d.str("b")});
  const auto c = run_cli({"price", "--config", kv, "--sigma", "0.25", "--out", d.str("c")});
  const auto e = run_cli({"price", "--sigma", "0.25", "--n", "50", "--strike", "105", "--out", d.str("e")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(field(a.out, "price"), field(b.out, "price"));
  EXPECT_NE(field(a.out, "price"), field(c.out, "price"));
  EXPECT_EQ(field(c.out, "price"), field(e.out, "price"));
  const auto ja = nlohmann::json::parse(slurp(d.str("a/price.json")));
  const auto jb = nlohmann::json::parse(slurp(d.str("b/price.json")));
  const auto jc = nlohmann::json::parse(slurp(d.str("c/price.json")));
  const auto je = nlohmann::json::parse(slurp(d.str("e/price.json")));
  EXPECT_EQ(ja["meta"]["config_hash"], jb["meta"]["config_hash"]);
  EXPECT_NE(ja["meta"]["config_hash"], jc["meta"]["config_hash"]);
  EXPECT_EQ(jc["meta"]["config_hash"], je["meta"]["config_hash"]);
  EXPECT_EQ(ja["meta"]["seed"], 0);

  const auto typo = d.file("typo.cfg", "sigmaa = 0.3\n");
  EXPECT_EQ(run_cli({"price", "--config", typo, "--out", d.str()}).code, gjr::cli::kConfigError);
}

TEST(Cli, RerunsAreByteIdentical) {
  TempDir d;
  for (const char* dir : {"r1", "r2"}) {
    const auto r = run_cli({"simulate", "--what", "paths", "--n", "30", "--count", "5", "--beta", "-1", "--seed", "9",
                        "--out", d.str(dir)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const std::string one = slurp(d.str("r1/ensemble.csv"));
  EXPECT_FALSE(one.empty());
  EXPECT_EQ(one, slurp(d.str("r2/ensemble.csv")));
  EXPECT_EQ(slurp(d.str("r1/simulate.json")), slurp(d.str("r2/simulate.json")));
  EXPECT_NE(one.find("seed=9"), std::string::npos);
}

TEST(Cli, OutputDirFromEnvironment) {
  TempDir d;
  ::setenv("GJR_OUTPUT_DIR", d.str("env").c_str(), 1);
  const auto r = run_cli({"simulate", "--what", "walk", "--n", "5"});
  ::unsetenv("GJR_OUTPUT_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(d.str("env/walk.csv")));
}
