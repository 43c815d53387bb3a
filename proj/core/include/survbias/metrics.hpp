#pragma once

#include "survbias/date.hpp"
#include "survbias/portfolio.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace survbias::metrics {

inline constexpr double kTradingDaysPerYear = 252.0;

/// prod(1 + r) - 1. Empty input gives 0. Throws DomainError if any r <= -1.
double cumulative_return(std::span<const double> returns);

/// (1 + cumulative)^(252 / n_days) - 1. Throws DomainError when
/// cumulative <= -1 or n_days == 0.
double annualized_return(double cumulative, std::size_t n_days);

double mean(std::span<const double> values);
/// T-1 denominator. Zero for fewer than two values.
double sample_std(std::span<const double> values);

/// (mean - rf) / sample std x sqrt(252). Throws InvalidInput for fewer than
/// two returns and ZeroVolatility when the sample std is zero.
double sharpe(std::span<const double> returns, double risk_free_daily = 0.0);

/// Wealth index W_t = prod_{j<=t}(1 + r_j), W_0 = 1 (not included).
std::vector<double> wealth_index(std::span<const double> returns);

/// min_t (W_t / max_{j<=t} W_j - 1), with W_0 = 1 counted in the running
/// peak. Always in [-1, 0].
double max_drawdown(std::span<const double> returns);

/// Sample std x sqrt(252); 0 for fewer than two returns.
double annualized_volatility(std::span<const double> returns);

struct PerfMetrics {
    double cumulative_return = 0.0;
    double annualized_return = 0.0;
    /// NaN when the series has zero volatility or fewer than two points.
    double sharpe = 0.0;
    double max_drawdown = 0.0;
    double annualized_volatility = 0.0;
    std::size_t n_days = 0;
    std::optional<Date> first_date;
    std::optional<Date> last_date;
};

PerfMetrics summarize(std::span<const double> returns, double risk_free_daily = 0.0);
PerfMetrics summarize(const portfolio::ReturnSeries& series, double risk_free_daily = 0.0);

/// Trailing-window Sharpe at every index with a full window; nullopt before
/// the window fills or when the window has zero volatility.
std::vector<std::optional<double>> rolling_sharpe(std::span<const double> returns, std::size_t window = 252,
                                                  double risk_free_daily = 0.0);

}  // namespace survbias::metrics
