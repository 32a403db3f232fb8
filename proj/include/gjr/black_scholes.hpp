#pragma once

namespace gjr {

enum class OptionKind { call, put };

double bs_price(double s0, double strike, double t, double rf, double sigma, OptionKind kind);

// Safeguarded Newton/bisection on sigma in [1e-6, 5]; throws NoSolution
// when the price lies outside the no-arbitrage band.
double bs_implied_vol(double price, double s0, double strike, double t, double rf, OptionKind kind);

}  // namespace gjr
