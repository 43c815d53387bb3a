#include "survbias/metrics.hpp"

#include "survbias/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace survbias::metrics {

double cumulative_return(std::span<const double> returns) {
    double growth = 1.0;
    for (double r : returns) {
        if (!(r > -1.0)) throw Error(ErrorCode::DomainError, "return <= -1 in cumulative product");
        growth *= 1.0 + r;
    }
    return growth - 1.0;
}

double annualized_return(double cumulative, std::size_t n_days) {
    if (!(cumulative > -1.0)) throw Error(ErrorCode::DomainError, "cumulative return <= -1");
    if (n_days == 0) throw Error(ErrorCode::DomainError, "annualizing over zero days");
    return std::pow(1.0 + cumulative, kTradingDaysPerYear / static_cast<double>(n_days)) - 1.0;
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    // A constant series has no dispersion; the rounded mean would otherwise
    // leave a residue of a few ulps.
    if (std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end()) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double sharpe(std::span<const double> returns, double risk_free_daily) {
    if (returns.size() < 2) throw Error(ErrorCode::InvalidInput, "sharpe needs at least two returns");
    const double sd = sample_std(returns);
    if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVolatility, "sample standard deviation is zero");
    return (mean(returns) - risk_free_daily) / sd * std::sqrt(kTradingDaysPerYear);
}

std::vector<double> wealth_index(std::span<const double> returns) {
    std::vector<double> w;
    w.reserve(returns.size());
    double level = 1.0;
    for (double r : returns) {
        if (!(r > -1.0)) throw Error(ErrorCode::DomainError, "return <= -1 in wealth index");
        level *= 1.0 + r;
        w.push_back(level);
    }
    return w;
}

double max_drawdown(std::span<const double> returns) {
    double peak = 1.0, level = 1.0, worst = 0.0;
    for (double r : returns) {
        if (!(r > -1.0)) throw Error(ErrorCode::DomainError, "return <= -1 in drawdown");
        level *= 1.0 + r;
        peak = std::max(peak, level);
        worst = std::min(worst, level / peak - 1.0);
    }
    return worst;
}

double annualized_volatility(std::span<const double> returns) {
    return sample_std(returns) * std::sqrt(kTradingDaysPerYear);
}

PerfMetrics summarize(std::span<const double> returns, double risk_free_daily) {
    PerfMetrics m;
    m.n_days = returns.size();
    m.cumulative_return = cumulative_return(returns);
    m.annualized_return = returns.empty() ? 0.0 : annualized_return(m.cumulative_return, returns.size());
    m.max_drawdown = max_drawdown(returns);
    m.annualized_volatility = annualized_volatility(returns);
    const double sd = sample_std(returns);
    m.sharpe = returns.size() >= 2 && sd > 0.0 ? sharpe(returns, risk_free_daily)
                                               : std::numeric_limits<double>::quiet_NaN();
    return m;
}

PerfMetrics summarize(const portfolio::ReturnSeries& series, double risk_free_daily) {
    auto m = summarize(series.returns, risk_free_daily);
    if (!series.dates.empty()) {
        m.first_date = series.dates.front();
        m.last_date = series.dates.back();
    }
    return m;
}

std::vector<std::optional<double>> rolling_sharpe(std::span<const double> returns, std::size_t window,
                                                  double risk_free_daily) {
    std::vector<std::optional<double>> out(returns.size());
    if (window < 2) return out;
    for (std::size_t i = window - 1; i < returns.size(); ++i) {
        auto slice = returns.subspan(i + 1 - window, window);
        const double sd = sample_std(slice);
        if (sd > 0.0) out[i] = (mean(slice) - risk_free_daily) / sd * std::sqrt(kTradingDaysPerYear);
    }
    return out;
}

}  // namespace survbias::metrics
