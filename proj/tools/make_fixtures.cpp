// Regenerates the synthetic CSV fixtures under tests/fixtures.
// Usage: gjr_make_fixtures [output_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "gjr/calibration.hpp"
#include "gjr/date.hpp"
#include "gjr/gjr_tree.hpp"
#include "gjr/io.hpp"
#include "gjr/rng.hpp"

namespace {

using gjr::Date;
using gjr::io::format_double;

Date next_weekday(Date d) {
  std::chrono::sys_days s{d};
  do {
    s += std::chrono::days{1};
  } while (std::chrono::weekday{s} == std::chrono::Saturday || std::chrono::weekday{s} == std::chrono::Sunday);
  return Date{s};
}

std::vector<Date> weekdays(Date first, Date last) {
  std::vector<Date> out;
  const std::chrono::weekday wd{std::chrono::sys_days{first}};
  Date d = (wd == std::chrono::Saturday || wd == std::chrono::Sunday) ? next_weekday(first) : first;
  for (; d <= last; d = next_weekday(d)) out.push_back(d);
  return out;
}

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}; }

std::ofstream open(const std::filesystem::path& p, const std::string& note) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << "# synthetic fixture: " << note << "\n";
  return out;
}

// Closing prices of one GJR tree path, rescaled so the last close is `last` when positive.
std::vector<double> gjr_closes(const gjr::NaturalParams& p, std::uint64_t seed, double last) {
  const auto paths = gjr::simulate_paths(gjr::build_tree(p), 1, seed);
  std::vector<double> closes = paths[0].prices;
  if (last > 0.0) {
    const double scale = last / closes.back();
    for (double& c : closes) c *= scale;
  }
  return closes;
}

void write_prices(const std::filesystem::path& p, const std::string& note, const std::vector<Date>& dates,
                  const std::vector<double>& closes) {
  auto out = open(p, note);
  out << "date,close\n";
  for (std::size_t i = 0; i < closes.size(); ++i) out << gjr::format_iso_date(dates[i]) << "," << format_double(closes[i]) << "\n";
}

void gjr_series(const std::filesystem::path& dir) {
  gjr::NaturalParams p;
  p.mu = 0.1;
  p.sigma = 0.15;
  p.beta = -2.0;
  p.n = 2519;
  p.s0 = 100.0;
  const auto dates = weekdays(ymd(2018, 1, 2), ymd(2100, 1, 1));
  write_prices(dir / "gjr_synthetic.csv", "GJR tree path, mu=0.1 sigma=0.15 beta=-2 dt=1/252 seed=11",
               {dates.begin(), dates.begin() + 2520}, gjr_closes(p, 11, 0.0));
}

void spy(const std::filesystem::path& dir) {
  const Date quote_date = ymd(2021, 6, 1);
  const double spot = 419.67, rf = 0.0162;
  gjr::NaturalParams p;
  p.mu = 0.119;
  p.sigma = 0.151;
  p.beta = -0.978;
  const auto dates = weekdays(ymd(2019, 6, 3), quote_date);
  p.n = static_cast<int>(dates.size()) - 1;
  write_prices(dir / "spy_prices.csv", "GJR tree path, mu=0.119 sigma=0.151 beta=-0.978 seed=21, rescaled to 419.67",
               dates, gjr_closes(p, 21, spot));

  // Leading-order GJR prices with hedging costs, quoted in cents around the model value.
  gjr::CalibrationContext ctx;
  ctx.mu = p.mu;
  ctx.sigma = p.sigma;
  ctx.beta = p.beta;
  ctx.htc = gjr::HTCParams{28.8, 0.297};
  auto out = open(dir / "spy_chain.csv",
                  "GJR leading-order prices, mu=0.119 sigma=0.151 beta=-0.978 lambda0=28.8 lambda1=0.297, "
                  "bid/ask rounded to cents, mid >= 0.05");
  out << "quote_date,expiry,strike,kind,bid,ask,spot,rf\n";
  for (int days : {5, 10, 21, 42, 63, 126, 189, 252}) {
    Date expiry = quote_date;
    for (int i = 0; i < days; ++i) expiry = next_weekday(expiry);
    for (double m = 0.80; m <= 1.2001; m += 0.05) {
      const double strike = std::round(spot * m);
      for (auto kind : {gjr::OptionKind::call, gjr::OptionKind::put}) {
        gjr::OptionQuote q;
        q.quote_date = quote_date;
        q.expiry_date = expiry;
        q.strike = strike;
        q.kind = kind;
        q.spot = spot;
        q.rf = rf;
        const double price = gjr::model_price(q, ctx);
        if (price < 0.05) continue;
        const double half = std::max(0.01, 0.005 * price);
        const double bid = std::max(0.0, std::round((price - half) * 100.0) / 100.0);
        const double ask = std::round((price + half) * 100.0) / 100.0;
        out << gjr::format_iso_date(quote_date) << "," << gjr::format_iso_date(expiry) << "," << format_double(strike)
            << "," << (kind == gjr::OptionKind::call ? "call" : "put") << "," << format_double(bid) << ","
            << format_double(ask) << "," << format_double(spot) << "," << format_double(rf) << "\n";
      }
    }
  }
}

void msft(const std::filesystem::path& dir) {
  const auto dates = weekdays(ymd(2015, 4, 30), ymd(2021, 4, 30));
  const double rf_pct = 1.62 / 252.0;
  gjr::CounterRng rng(31);
  std::student_t_distribution<double> t_mkt(4.0), t_idio(6.24);
  const auto scaled_t = [&](std::student_t_distribution<double>& d) {
    const double nu = d.n();
    return d(rng) * std::sqrt((nu - 2.0) / nu);
  };

  auto ff = open(dir / "ff5_factors.csv",
                 "daily factor returns in percent; Mkt-RF Student-t(4) with a 3x volatility burst "
                 "2020-02-24..2020-04-30, other factors Gaussian, RF = 1.62%/252; seed=31");
  ff << "date,Mkt-RF,SMB,HML,RMW,CMA,RF\n";
  std::vector<double> closes{1.0};
  const Date burst_lo = ymd(2020, 2, 24), burst_hi = ymd(2020, 4, 30);
  for (std::size_t i = 1; i < dates.size(); ++i) {
    const double burst = (dates[i] >= burst_lo && dates[i] <= burst_hi) ? 3.0 : 1.0;
    const double mkt = 0.04 + 0.9 * burst * scaled_t(t_mkt);
    const double smb = 0.55 * rng.normal();
    const double hml = 0.60 * rng.normal();
    const double rmw = 0.40 * rng.normal();
    const double cma = 0.30 * rng.normal();
    ff << gjr::format_iso_date(dates[i]) << "," << format_double(mkt) << "," << format_double(smb) << ","
       << format_double(hml) << "," << format_double(rmw) << "," << format_double(cma) << "," << format_double(rf_pct)
       << "\n";
    // Stock log return in decimal: factor loadings plus Student-t(6.24) idiosyncratic noise.
    const double r = 0.01 * (rf_pct + 0.04 + 1.15 * mkt - 0.25 * smb - 0.35 * hml + 0.35 * rmw - 0.30 * cma) +
                     0.011 * burst * scaled_t(t_idio);
    closes.push_back(closes.back() * std::exp(r));
  }
  // Pin the closes at the start, the period boundary and the end to the
  // stock's public closing levels by a constant log-drift shift per period.
  const Date split = ymd(2017, 4, 28);
  const std::size_t ks = static_cast<std::size_t>(std::find(dates.begin(), dates.end(), split) - dates.begin());
  const std::size_t kn = closes.size() - 1;
  const double anchors[] = {48.64, 68.46, 252.18};
  std::vector<double> logc(closes.size());
  for (std::size_t k = 0; k <= kn; ++k) logc[k] = std::log(closes[k]);
  const double shift1 = (std::log(anchors[1] / anchors[0]) - (logc[ks] - logc[0])) / static_cast<double>(ks);
  const double shift2 = (std::log(anchors[2] / anchors[1]) - (logc[kn] - logc[ks])) / static_cast<double>(kn - ks);
  for (std::size_t k = 0; k <= kn; ++k) {
    const double drift = k <= ks ? shift1 * static_cast<double>(k)
                                 : shift1 * static_cast<double>(ks) + shift2 * static_cast<double>(k - ks);
    closes[k] = anchors[0] * std::exp(logc[k] - logc[0] + drift);
  }
  write_prices(dir / "msft_prices.csv",
               "stock with five-factor loadings (1.15, -0.25, -0.35, 0.35, -0.30), daily alpha 4bp, "
               "Student-t(6.24) idiosyncratic noise 1.1% daily, log drift shifted per period so the closes on "
               "2015-04-30, 2017-04-28 and 2021-04-30 are 48.64, 68.46 and 252.18; seed=31",
               dates, closes);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "tests/fixtures";
  try {
    std::filesystem::create_directories(dir);
    gjr_series(dir);
    spy(dir);
    msft(dir);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cout << "fixtures written to " << dir.string() << "\n";
  return 0;
}
