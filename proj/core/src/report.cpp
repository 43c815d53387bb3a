#include "survbias/report.hpp"

#include "survbias/csv.hpp"
#include "survbias/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace survbias::report {

namespace {

using json = nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

json optional_date(const std::optional<Date>& d) { return d ? json(d->iso()) : json(nullptr); }

std::string cell(double v) { return std::isfinite(v) ? csv::format_number(v) : std::string(); }

std::string cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }

Date iso_or_throw(const std::string& text, ErrorCode code) {
    auto d = parse_iso_date(text);
    if (!d) throw Error(code, "bad ISO date '" + text + "'");
    return *d;
}

std::string str(std::string_view v) { return std::string(v); }

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::FileUnreadable, "cannot read " + path.string());
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::FileUnreadable, "cannot create " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write " + path.string());
}

std::string timelines_to_json(std::span<const universe::MembershipTimeline> timelines) {
    json arr = json::array();
    for (const auto& t : timelines) {
        json dates = json::array();
        for (auto d : t.member_dates) dates.push_back(d.iso());
        arr.push_back({{"symbol", t.symbol},
                       {"entry", t.entry.iso()},
                       {"exit", t.exit.iso()},
                       {"snapshots", dates},
                       {"classification", str(universe::to_string(t.classification))},
                       {"last_trade", optional_date(t.last_trade)}});
    }
    return arr.dump(1) + "\n";
}

std::vector<universe::MembershipTimeline> timelines_from_json(std::string_view text) {
    std::vector<universe::MembershipTimeline> out;
    try {
        auto arr = json::parse(text);
        if (!arr.is_array()) throw Error(ErrorCode::InvalidInput, "timelines JSON must be an array");
        for (const auto& j : arr) {
            universe::MembershipTimeline t;
            t.symbol = j.at("symbol").get<std::string>();
            t.entry = iso_or_throw(j.at("entry").get<std::string>(), ErrorCode::InvalidInput);
            t.exit = iso_or_throw(j.at("exit").get<std::string>(), ErrorCode::InvalidInput);
            for (const auto& d : j.at("snapshots"))
                t.member_dates.push_back(iso_or_throw(d.get<std::string>(), ErrorCode::InvalidInput));
            auto cls = universe::parse_removal_class(j.at("classification").get<std::string>());
            if (!cls) throw Error(ErrorCode::InvalidInput, "unknown classification for " + t.symbol);
            t.classification = *cls;
            if (j.contains("last_trade") && !j.at("last_trade").is_null())
                t.last_trade = iso_or_throw(j.at("last_trade").get<std::string>(), ErrorCode::InvalidInput);
            if (t.member_dates.empty()) throw Error(ErrorCode::InvalidInput, t.symbol + " has no member dates");
            out.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("timelines JSON: ") + e.what());
    }
    return out;
}

std::string ranking_csv(const universe::SnapshotRanking& ranking) {
    std::string out = "RANK,SYMBOL,PROXY\n";
    for (std::size_t i = 0; i < ranking.entries.size(); ++i)
        out += std::to_string(i + 1) + ',' + csv::escape(ranking.entries[i].symbol) + ',' +
               cell(ranking.entries[i].proxy) + '\n';
    return out;
}

std::string snapshots_csv(std::span<const universe::ConstituentSnapshot> snapshots) {
    std::string out = "DATE,SYMBOL\n";
    for (const auto& s : snapshots) {
        const auto date = s.date.iso();
        for (const auto& m : s.members) out += date + ',' + csv::escape(m) + '\n';
    }
    return out;
}

std::string validation_to_json(const universe::ValidationReport& r) {
    json spots = json::array();
    for (const auto& s : r.spot_checks)
        spots.push_back({{"symbol", s.symbol},
                         {"classification", str(universe::to_string(s.classification))},
                         {"consistent", s.consistent}});
    const auto& c = r.consistency;
    json j = {{"current_match_count", r.current_match_count},
              {"current_list_size", r.current_list_size},
              {"match_fraction", r.match_fraction},
              {"missing_from_reconstruction", r.missing_from_reconstruction},
              {"extra_in_reconstruction", r.extra_in_reconstruction},
              {"consistency",
               {{"survivors_recently_active", c.survivors_recently_active},
                {"inactive_survivors", c.inactive_survivors},
                {"exits_after_entries", c.exits_after_entries},
                {"exit_before_entry", c.exit_before_entry},
                {"mean_exit_age_removed_days", c.mean_exit_age_removed},
                {"mean_exit_age_survivors_days", c.mean_exit_age_survivors},
                {"removed_exits_older", c.removed_exits_older}}},
              {"spot_checks", spots},
              {"all_passed", r.all_passed()}};
    return j.dump(1) + "\n";
}

std::string series_csv(const portfolio::ReturnSeries& s) {
    std::string out = "DATE,RETURN,N_ACTIVE\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += s.dates[i].iso() + ',' + cell(s.returns[i]) + ',' + std::to_string(s.n_active[i]) + '\n';
    return out;
}

namespace {

json metrics_json(const metrics::PerfMetrics& m) {
    return {{"cumulative", number_or_null(m.cumulative_return)},
            {"annual", number_or_null(m.annualized_return)},
            {"sharpe", number_or_null(m.sharpe)},
            {"max_drawdown", number_or_null(m.max_drawdown)},
            {"volatility", number_or_null(m.annualized_volatility)},
            {"n_days", m.n_days},
            {"first_date", optional_date(m.first_date)},
            {"last_date", optional_date(m.last_date)}};
}

}  // namespace

std::string metrics_to_json(const metrics::PerfMetrics& m) { return metrics_json(m).dump(1) + "\n"; }

namespace {

json bias_json(const bias::BiasReport& report, const metrics::PerfMetrics& survivor,
               const metrics::PerfMetrics& complete) {
    json rows = json::array();
    for (const auto& b : report.metrics)
        rows.push_back({{"metric", str(bias::to_string(b.metric))},
                        {"survivor", number_or_null(b.survivor_value)},
                        {"complete", number_or_null(b.complete_value)},
                        {"absolute_bias", number_or_null(b.absolute_bias)},
                        {"relative_bias_pct", optional_number(b.relative_bias_pct)}});
    json boot = nullptr;
    if (report.bootstrap)
        boot = {{"n_resamples", report.bootstrap->n_resamples},
                {"seed", report.bootstrap->seed},
                {"p_value_return", report.bootstrap->p_value_return},
                {"p_value_sharpe", optional_number(report.bootstrap->p_value_sharpe)}};
    json decomp = json::array();
    for (const auto& d : report.decomposition)
        decomp.push_back({{"category", str(universe::to_string(d.category))},
                          {"count", d.count},
                          {"pct_of_removed", optional_number(d.pct_of_removed)},
                          {"mean_member_return", optional_number(d.mean_member_return)}});
    json j = {{"survivor", metrics_json(survivor)},
              {"complete", metrics_json(complete)},
              {"bias", rows},
              {"bootstrap", boot},
              {"decomposition", decomp}};
    return j;
}

json scenario_json(const robustness::ScenarioConfig& c) {
    json j = {{"label", c.label},
              {"band", {c.band.low, c.band.high}},
              {"frequency", str(universe::to_string(c.frequency))},
              {"weighting", str(portfolio::to_string(c.weighting.kind))},
              {"aggregation", str(portfolio::to_string(c.aggregation))}};
    j["clip"] = c.weighting.clip ? json{c.weighting.clip->lower, c.weighting.clip->upper} : json(nullptr);
    j["delist_terminal"] = c.delist_terminal_return ? json(*c.delist_terminal_return) : json(nullptr);
    if (c.subperiod) j["subperiod"] = {c.subperiod->start.iso(), c.subperiod->end.iso()};
    return j;
}

}  // namespace

std::string bias_to_json(const bias::BiasReport& report, const metrics::PerfMetrics& survivor,
                         const metrics::PerfMetrics& complete) {
    return bias_json(report, survivor, complete).dump(1) + "\n";
}

std::string scenario_result_to_json(const robustness::ScenarioResult& r) {
    json j = {{"config", scenario_json(r.config)},
              {"snapshot_count", r.snapshot_count},
              {"ever_members", r.ever_members},
              {"survivor_count", r.survivor_count},
              {"return_bias_pp", number_or_null(r.return_bias_pp())},
              {"sharpe_bias", number_or_null(r.sharpe_bias())},
              {"report", bias_json(r.bias, r.survivor, r.complete)}};
    return j.dump(1) + "\n";
}

std::string decomposition_csv(std::span<const bias::DecompositionRow> rows) {
    std::string out = "CATEGORY,COUNT,PCT_REMOVED,MEAN_RETURN\n";
    for (const auto& r : rows)
        out += str(universe::to_string(r.category)) + ',' + std::to_string(r.count) + ',' + cell(r.pct_of_removed) +
               ',' + cell(r.mean_member_return) + '\n';
    return out;
}

std::string cumulative_csv(const portfolio::ReturnSeries& survivor, const portfolio::ReturnSeries& complete) {
    if (survivor.dates != complete.dates)
        throw Error(ErrorCode::WindowMismatch, "survivor and complete series cover different dates");
    auto ws = metrics::wealth_index(survivor.returns);
    auto wc = metrics::wealth_index(complete.returns);
    std::string out = "DATE,SURVIVOR,COMPLETE\n";
    for (std::size_t i = 0; i < ws.size(); ++i)
        out += survivor.dates[i].iso() + ',' + cell(ws[i]) + ',' + cell(wc[i]) + '\n';
    return out;
}

std::string rolling_sharpe_csv(const portfolio::ReturnSeries& survivor, const portfolio::ReturnSeries& complete,
                               std::size_t window) {
    if (survivor.dates != complete.dates)
        throw Error(ErrorCode::WindowMismatch, "survivor and complete series cover different dates");
    auto rs = metrics::rolling_sharpe(survivor.returns, window);
    auto rc = metrics::rolling_sharpe(complete.returns, window);
    std::string out = "DATE,SURVIVOR,COMPLETE\n";
    for (std::size_t i = 0; window > 0 && i + 1 >= window && i < rs.size(); ++i)
        out += survivor.dates[i].iso() + ',' + cell(rs[i]) + ',' + cell(rc[i]) + '\n';
    return out;
}

std::string membership_csv(std::span<const universe::ConstituentSnapshot> snapshots) {
    std::string out = "DATE,MEMBERS,ENTRANTS,EXITS\n";
    const std::vector<std::string> none;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const auto& cur = snapshots[k].members;
        const auto& prev = k > 0 ? snapshots[k - 1].members : none;
        std::set<std::string> a(prev.begin(), prev.end()), b(cur.begin(), cur.end());
        std::size_t entrants = 0, exits = 0;
        for (const auto& s : b) entrants += !a.count(s);
        for (const auto& s : a) exits += !b.count(s);
        out += snapshots[k].date.iso() + ',' + std::to_string(cur.size()) + ',' + std::to_string(entrants) + ',' +
               std::to_string(exits) + '\n';
    }
    return out;
}

std::string ingest_stats_to_json(const IngestStats& s, std::span<const FileIssue> issues) {
    json iss = json::array();
    for (const auto& i : issues)
        iss.push_back({{"file", i.path.filename().string()}, {"code", i.code}, {"message", i.message}});
    json j = {{"files_seen", s.files_seen},
              {"files_parsed", s.files_parsed},
              {"files_schema_unrecognized", s.files_schema_unrecognized},
              {"files_empty", s.files_empty},
              {"files_unreadable", s.files_unreadable},
              {"raw_records", s.raw_records},
              {"skipped_records", s.skipped_records},
              {"non_equity_records", s.non_equity_records},
              {"duplicate_records", s.duplicate_records},
              {"conflicting_duplicates", s.conflicting_duplicates},
              {"retained_records", s.retained_records},
              {"outlier_flags", s.outlier_flags},
              {"unique_symbols", s.unique_symbols},
              {"trading_days", s.trading_days},
              {"first_date", optional_date(s.first_date)},
              {"last_date", optional_date(s.last_date)},
              {"issues", iss}};
    return j.dump(1) + "\n";
}

namespace {

robustness::ScenarioConfig scenario_from(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "each scenario must be a JSON object");
    robustness::ScenarioConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "label") {
            c.label = v.get<std::string>();
        } else if (key == "band") {
            auto b = v.get<std::vector<int>>();
            if (b.size() != 2) throw Error(ErrorCode::InvalidConfig, "band must be [low, high]");
            c.band = {b[0], b[1]};
        } else if (key == "frequency") {
            auto f = universe::parse_frequency(v.get<std::string>());
            if (!f) throw Error(ErrorCode::InvalidConfig, "unknown frequency " + v.dump());
            c.frequency = *f;
        } else if (key == "weighting") {
            auto w = portfolio::parse_weight_kind(v.get<std::string>());
            if (!w) throw Error(ErrorCode::InvalidConfig, "unknown weighting " + v.dump());
            c.weighting.kind = *w;
        } else if (key == "clip") {
            if (v.is_null()) {
                c.weighting.clip.reset();
            } else {
                auto b = v.get<std::vector<double>>();
                if (b.size() != 2) throw Error(ErrorCode::InvalidConfig, "clip must be [low, high]");
                c.weighting.clip = portfolio::ClipBounds{b[0], b[1]};
            }
        } else if (key == "aggregation") {
            auto a = portfolio::parse_aggregation(v.get<std::string>());
            if (!a) throw Error(ErrorCode::InvalidConfig, "unknown aggregation " + v.dump());
            c.aggregation = *a;
        } else if (key == "delist_terminal") {
            if (v.is_null())
                c.delist_terminal_return.reset();
            else
                c.delist_terminal_return = v.get<double>();
        } else if (key == "subperiod") {
            auto w = v.get<std::vector<std::string>>();
            if (w.size() != 2) throw Error(ErrorCode::InvalidConfig, "subperiod must be [start, end]");
            c.subperiod = robustness::DateWindow{iso_or_throw(w[0], ErrorCode::InvalidConfig),
                                                 iso_or_throw(w[1], ErrorCode::InvalidConfig)};
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown scenario key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

}  // namespace

std::vector<robustness::ScenarioConfig> scenarios_from_json(std::string_view text) {
    std::vector<robustness::ScenarioConfig> out;
    try {
        auto j = json::parse(text);
        const json* list = &j;
        if (j.is_object()) {
            if (!j.contains("scenarios")) throw Error(ErrorCode::InvalidConfig, "scenario file lacks 'scenarios'");
            list = &j.at("scenarios");
        }
        if (!list->is_array()) throw Error(ErrorCode::InvalidConfig, "scenarios must be a JSON array");
        for (const auto& s : *list) out.push_back(scenario_from(s));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("scenario file: ") + e.what());
    }
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "scenario file holds no scenarios");
    std::set<std::string> labels;
    for (const auto& c : out)
        if (!labels.insert(c.label).second) throw Error(ErrorCode::InvalidConfig, "duplicate scenario label " + c.label);
    return out;
}

std::string scenarios_to_json(std::span<const robustness::ScenarioConfig> scenarios) {
    json arr = json::array();
    for (const auto& c : scenarios) arr.push_back(scenario_json(c));
    return json{{"scenarios", arr}}.dump(1) + "\n";
}

std::string comparison_csv(std::span<const robustness::ScenarioResult> results) {
    std::string out = "LABEL,SURV_RET,COMP_RET,BIAS_PP,SHARPE_BIAS\n";
    for (const auto& r : results)
        out += csv::escape(r.config.label) + ',' + cell(r.survivor.annualized_return * 100.0) + ',' +
               cell(r.complete.annualized_return * 100.0) + ',' + cell(r.return_bias_pp()) + ',' +
               cell(r.sharpe_bias()) + '\n';
    return out;
}

std::string period_rows_csv(std::span<const robustness::PeriodRow> rows) {
    std::string out = "LABEL,START,END,PARTIAL,SURV_RET,COMP_RET,BIAS_PP,SURV_VOL,COMP_VOL\n";
    for (const auto& r : rows)
        out += csv::escape(r.label) + ',' + r.window.start.iso() + ',' + r.window.end.iso() + ',' +
               (r.partial ? "1" : "0") + ',' + cell(r.survivor_return * 100.0) + ',' +
               cell(r.complete_return * 100.0) + ',' + cell(r.bias_pp) + ',' + cell(r.survivor_volatility * 100.0) +
               ',' + cell(r.complete_volatility * 100.0) + '\n';
    return out;
}

std::string subperiod_summary_to_json(const robustness::SubperiodTable& t) {
    const auto& s = t.summary;
    json j = {{"years", s.years},
              {"positive_years", s.positive_years},
              {"median_bias_pp", number_or_null(s.median_bias_pp)},
              {"mean_bias_pp", number_or_null(s.mean_bias_pp)},
              {"std_bias_pp", number_or_null(s.std_bias_pp)},
              {"min_bias_pp", number_or_null(s.min_bias_pp)},
              {"max_bias_pp", number_or_null(s.max_bias_pp)},
              {"skipped_windows", t.skipped}};
    return j.dump(1) + "\n";
}

}  // namespace survbias::report
