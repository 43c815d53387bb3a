#pragma once

#include "survbias/date.hpp"
#include "survbias/ingest.hpp"
#include "survbias/portfolio.hpp"
#include "survbias/universe.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace survbias::synth {

struct ChurnRates {
    /// Per-quarter probability that a listed stock stops trading.
    double delist_hazard = 0.02;
    /// Per-quarter probability that a band member jumps above the band.
    double graduation_rate = 0.03;
    /// Per-quarter probability that a band member drops below the band.
    double demotion_rate = 0.04;
};

struct SynthConfig {
    std::size_t n_stocks = 500;
    std::size_t n_days = 504;
    /// When non-zero, overrides n_days: the calendar runs through the last
    /// weekday of the n-th calendar quarter (the start quarter counts).
    std::size_t n_quarters = 8;
    std::uint64_t seed = 42;
    Date start{2016, 9, 30};
    ChurnRates churn{};
    double volatility = 0.02;
    double drift = 0.0003;
    double survivor_premium = 0.0004;
    /// Extra daily drift over the final `predeath_days` of a dying stock.
    double predeath_drift = -0.004;
    std::size_t predeath_days = 60;
    universe::RankBand band{};
    /// Probability per snapshot that the volumes of band-edge neighbours
    /// (ranks high and high+1) are swapped in the emitted files while the
    /// truth keeps the intended order.
    double boundary_swap_prob = 0.0;
    /// Extra non-equity rows per file (bond and warrant series).
    std::size_t non_equity_rows = 3;
    /// Files dated on or after this use the UDiFF column layout.
    std::optional<Date> udiff_from;

    /// Throws InvalidConfig: rates outside [0, 1], n_stocks <= 400, band
    /// not fitting inside n_stocks, non-positive volatility, empty calendar.
    void validate() const;
    /// Zero hazard, graduation and demotion.
    static SynthConfig no_churn();
};

struct EventCounts {
    std::size_t deaths = 0;
    std::size_t graduations = 0;
    std::size_t demotions = 0;
    std::size_t boundary_swaps = 0;
};

struct GroundTruth {
    std::vector<universe::ConstituentSnapshot> snapshots;
    /// Every symbol that was ever a band member.
    std::map<std::string, universe::RemovalClass> classification;
    portfolio::ReturnSeries survivor_ew;
    portfolio::ReturnSeries complete_ew;
    portfolio::ReturnSeries survivor_vw;
    portfolio::ReturnSeries complete_vw;
    EventCounts events;
    std::size_t equity_rows = 0;
    std::size_t non_equity_rows = 0;

    const std::vector<std::string>& final_members() const { return snapshots.back().members; }
};

class SynthMarket {
public:
    const SynthConfig& config() const { return config_; }
    const GroundTruth& truth() const { return truth_; }
    const std::vector<Date>& calendar() const { return calendar_; }
    const std::vector<std::string>& symbols() const { return symbols_; }

    std::size_t file_count() const { return calendar_.size(); }
    std::string file_name(std::size_t day) const;
    std::string file_content(std::size_t day) const;
    /// Equity rows exactly as the files carry them, in (date, symbol) order.
    std::vector<ingest::TradingRecord> equity_records() const;

    /// Writes one file per trading day into `dir`, creating it if needed.
    /// Returns the paths in calendar order.
    std::vector<std::filesystem::path> write_files(const std::filesystem::path& dir) const;

private:
    friend SynthMarket generate(const SynthConfig& config);

    struct Row {
        double open, high, low, close, qty, value;
        std::size_t trades;
    };
    Row row(std::size_t stock, std::size_t day) const;
    bool alive(std::size_t stock, std::size_t day) const;
    double close(std::size_t stock, std::size_t day) const { return close_[stock * calendar_.size() + day]; }
    double qty(std::size_t stock, std::size_t day) const;

    SynthConfig config_;
    GroundTruth truth_;
    std::vector<Date> calendar_;
    std::vector<std::string> symbols_;
    std::vector<std::string> isins_;
    std::vector<std::size_t> snapshot_days_;
    /// Last trading day per stock (n_days - 1 when it never dies).
    std::vector<std::size_t> last_day_;
    /// Emitted close per (stock, day); NaN when not trading.
    std::vector<double> close_;
    /// Emitted volume on snapshot days, per snapshot x stock (0 when dead).
    std::vector<std::vector<double>> snapshot_qty_;
};

/// Deterministic given config.seed. Throws InvalidConfig on a bad config.
SynthMarket generate(const SynthConfig& config);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(std::string_view text);

/// Recognised keys mirror the SynthConfig field names; churn is a nested
/// object. Unknown keys throw InvalidConfig.
SynthConfig config_from_json(std::string_view text);
std::string config_to_json(const SynthConfig& config);

struct QuarterOverlap {
    Date date;
    std::size_t truth_size = 0;
    std::size_t pipeline_size = 0;
    std::size_t common = 0;
    double overlap_pct = 0.0;
};

struct SeriesDeviation {
    std::string name;
    bool dates_match = false;
    bool n_active_match = false;
    double max_abs_deviation = 0.0;
};

struct AccuracyReport {
    std::vector<QuarterOverlap> quarters;
    double min_overlap_pct = 0.0;
    /// confusion[truth][pipeline], indexed by RemovalClass.
    std::array<std::array<std::size_t, 4>, 4> confusion{};
    std::size_t truth_only_symbols = 0;
    std::size_t pipeline_only_symbols = 0;
    std::vector<SeriesDeviation> series;

    bool membership_exact() const;
    std::size_t classification_agreements() const;
};

struct PipelineOutputs {
    std::span<const universe::ConstituentSnapshot> snapshots;
    std::span<const universe::MembershipTimeline> timelines;
    const portfolio::ReturnSeries* survivor_ew = nullptr;
    const portfolio::ReturnSeries* complete_ew = nullptr;
    const portfolio::ReturnSeries* survivor_vw = nullptr;
    const portfolio::ReturnSeries* complete_vw = nullptr;
};

/// Snapshots are matched by date; a truth snapshot with no pipeline
/// counterpart scores 0% overlap. Series deviations are computed only for
/// series supplied; a date mismatch reports an infinite deviation.
AccuracyReport score_pipeline(const PipelineOutputs& pipeline, const GroundTruth& truth);

std::string report_to_json(const AccuracyReport& report);

}  // namespace survbias::synth
