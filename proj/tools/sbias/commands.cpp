#include "commands.hpp"

#include "manifest.hpp"

#include "survbias/error.hpp"
#include "survbias/report.hpp"
#include "survbias/robustness.hpp"
#include "survbias/store.hpp"
#include "survbias/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace sbias {

namespace {

using nlohmann::json;
using survbias::Error;
using survbias::ErrorCode;
namespace report = survbias::report;
namespace robustness = survbias::robustness;
namespace universe = survbias::universe;
namespace portfolio = survbias::portfolio;

void emit(RunManifest& m, const std::string& relative, std::string_view content) {
    report::write_text(m.out_dir() / relative, content);
    m.add_output(relative);
}

json band_json(universe::RankBand b) { return json::array({b.low, b.high}); }

json clip_json(const std::optional<portfolio::ClipBounds>& c) {
    return c ? json::array({c->lower, c->upper}) : json(nullptr);
}

std::string safe_label(std::string label) {
    for (auto& c : label)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return label;
}

robustness::UniverseState state_from_timelines(std::vector<universe::MembershipTimeline> timelines,
                                               const survbias::RecordStore& store) {
    if (timelines.empty()) throw Error(ErrorCode::InvalidInput, "timelines file holds no members");
    robustness::UniverseState state;
    state.snapshots = robustness::snapshots_from_timelines(timelines);
    state.timelines = std::move(timelines);
    state.asof = store.calendar().back();
    return state;
}

std::size_t count_class(std::span<const universe::MembershipTimeline> t, universe::RemovalClass c) {
    return static_cast<std::size_t>(
        std::count_if(t.begin(), t.end(), [c](const auto& x) { return x.classification == c; }));
}

void write_scenario_outputs(RunManifest& m, const std::string& dir, const robustness::ScenarioResult& r) {
    emit(m, dir + "/metrics_survivor.json", report::metrics_to_json(r.survivor));
    emit(m, dir + "/metrics_complete.json", report::metrics_to_json(r.complete));
    emit(m, dir + "/bias_report.json", report::bias_to_json(r.bias, r.survivor, r.complete));
    emit(m, dir + "/decomposition.csv", report::decomposition_csv(r.bias.decomposition));
}

}  // namespace

universe::RankBand parse_band(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidConfig, "band must look like 151:400");
    try {
        std::size_t a = 0, b = 0;
        int lo = std::stoi(text.substr(0, colon), &a);
        int hi = std::stoi(text.substr(colon + 1), &b);
        if (a != colon || b != text.size() - colon - 1) throw std::invalid_argument("junk");
        if (lo < 1 || hi <= lo) throw Error(ErrorCode::InvalidConfig, "band needs 1 <= low < high");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidConfig, "band must look like 151:400, got '" + text + "'");
    }
}

std::optional<portfolio::ClipBounds> parse_clip(const std::string& text) {
    if (text == "none" || text.empty()) return std::nullopt;
    auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidConfig, "clip must look like -0.5:1.0 or none");
    try {
        std::size_t a = 0, b = 0;
        double lo = std::stod(text.substr(0, colon), &a);
        double hi = std::stod(text.substr(colon + 1), &b);
        if (a != colon || b != text.size() - colon - 1) throw std::invalid_argument("junk");
        portfolio::WeightScheme{portfolio::WeightKind::EqualWeight, portfolio::ClipBounds{lo, hi}}.validate();
        return portfolio::ClipBounds{lo, hi};
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidConfig, "clip must look like -0.5:1.0, got '" + text + "'");
    }
}

// ---------------------------------------------------------------------------

int cmd_ingest(const IngestArgs& args, std::ostream& log) {
    RunManifest m("ingest", args.out);
    m.set_config({{"data_dir", args.data_dir.string()}});
    auto files = survbias::list_input_files(args.data_dir);
    for (const auto& f : files) m.add_input(f);
    m.phase("hash_inputs");

    auto result = survbias::ingest_files(files);
    m.phase("ingest");
    const auto& st = result.stats;
    emit(m, "ingest_stats.json", report::ingest_stats_to_json(st, result.issues));

    if (st.files_schema_unrecognized * 2 > st.files_seen) {
        m.write();
        log << "error: " << st.files_schema_unrecognized << " of " << st.files_seen
            << " files have an unrecognized schema in " << args.data_dir.string() << "\n";
        return 1;
    }
    survbias::write_canonical(result.store, args.out / "store.csv");
    m.add_output("store.csv");
    m.phase("write");
    m.write();
    log << "ingest: " << st.files_parsed << "/" << st.files_seen << " files, " << st.retained_records
        << " records, " << st.unique_symbols << " symbols, " << st.trading_days << " days\n";
    return 0;
}

int cmd_reconstruct(const ReconstructArgs& args, std::ostream& log) {
    RunManifest m("reconstruct", args.out);
    m.set_config({{"store", args.store.string()},
                  {"band", band_json(args.band)},
                  {"frequency", std::string(universe::to_string(args.frequency))},
                  {"official_list", args.official_list ? json(args.official_list->string()) : json(nullptr)},
                  {"seed", args.seed}});
    m.add_input(args.store);
    auto store = survbias::read_canonical(args.store);
    if (store.calendar().empty()) throw Error(ErrorCode::EmptyWindow, "store " + args.store.string() + " is empty");
    m.phase("load");

    auto recon = universe::reconstruct(store, args.band, args.frequency);
    auto timelines = universe::build_timeline(recon.snapshots);
    const auto asof = store.calendar().back();
    universe::classify_removals(timelines, store, asof, recon.snapshots.back().date);
    m.phase("reconstruct");

    for (const auto& r : recon.rankings) emit(m, "rankings/" + r.date.iso() + ".csv", report::ranking_csv(r));
    emit(m, "snapshots.csv", report::snapshots_csv(recon.snapshots));
    emit(m, "timelines.json", report::timelines_to_json(timelines));
    emit(m, "membership.csv", report::membership_csv(recon.snapshots));

    using universe::RemovalClass;
    json summary = {{"snapshots", recon.snapshots.size()},
                    {"first_snapshot", recon.snapshots.front().date.iso()},
                    {"final_snapshot", recon.snapshots.back().date.iso()},
                    {"asof", asof.iso()},
                    {"ever_members", timelines.size()},
                    {"survivors", count_class(timelines, RemovalClass::Survivor)},
                    {"delisted", count_class(timelines, RemovalClass::Delisted)},
                    {"graduated", count_class(timelines, RemovalClass::Graduated)},
                    {"demoted", count_class(timelines, RemovalClass::Demoted)},
                    {"validation", nullptr}};

    if (args.official_list && std::filesystem::exists(*args.official_list)) {
        m.add_input(*args.official_list);
        auto official = universe::read_symbol_list(*args.official_list);
        universe::ValidationOptions vopts;
        vopts.asof = asof;
        vopts.seed = args.seed;
        auto v = universe::validate_reconstruction(recon.snapshots.back(), official, timelines, vopts);
        emit(m, "validation.json", report::validation_to_json(v));
        summary["validation"] = v.all_passed() ? "passed" : "failed";
        log << "validation: " << v.current_match_count << "/" << v.current_list_size << " current constituents, "
            << (v.all_passed() ? "all checks passed" : "some checks failed") << "\n";
    } else {
        const auto why = args.official_list ? "official list " + args.official_list->string() + " not found"
                                            : std::string("no official list given");
        log << "warning: " << why << "; validation skipped\n";
        summary["validation"] = "skipped";
    }
    emit(m, "reconstruct_summary.json", summary.dump(1) + "\n");
    m.phase("write");
    m.write();
    log << "reconstruct: " << recon.snapshots.size() << " snapshots, " << timelines.size() << " ever-members\n";
    return 0;
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& log) {
    robustness::ScenarioConfig config;
    config.label = "analyze";
    config.weighting = args.weighting;
    config.aggregation = args.aggregation;
    config.delist_terminal_return = args.delist_terminal;
    config.validate();

    RunManifest m("analyze", args.out);
    m.set_config({{"store", args.store.string()},
                  {"timelines", args.timelines.string()},
                  {"weighting", std::string(portfolio::to_string(args.weighting.kind))},
                  {"clip", clip_json(args.weighting.clip)},
                  {"aggregation", std::string(portfolio::to_string(args.aggregation))},
                  {"delist_terminal", args.delist_terminal ? json(*args.delist_terminal) : json(nullptr)},
                  {"bootstrap_n", args.bootstrap_n},
                  {"seed", args.seed}});
    m.add_input(args.store);
    m.add_input(args.timelines);
    auto store = survbias::read_canonical(args.store);
    if (store.calendar().empty()) throw Error(ErrorCode::EmptyWindow, "store " + args.store.string() + " is empty");
    auto state = state_from_timelines(report::timelines_from_json(report::read_text(args.timelines)), store);
    m.phase("load");

    robustness::AnalysisOptions opts;
    opts.bootstrap_n = args.bootstrap_n;
    opts.seed = args.seed;
    auto r = robustness::run_analysis(store, state, config, opts);
    m.phase("analyze");

    write_scenario_outputs(m, ".", r);
    emit(m, "series_survivor.csv", report::series_csv(r.survivor_series));
    emit(m, "series_complete.csv", report::series_csv(r.complete_series));
    emit(m, "figures/cumulative.csv", report::cumulative_csv(r.survivor_series, r.complete_series));
    emit(m, "figures/rolling_sharpe.csv", report::rolling_sharpe_csv(r.survivor_series, r.complete_series));
    emit(m, "figures/membership.csv", report::membership_csv(state.snapshots));
    m.phase("write");
    m.write();

    log << "analyze: annual return survivor " << r.survivor.annualized_return * 100 << "% complete "
        << r.complete.annualized_return * 100 << "% bias " << r.return_bias_pp() << "pp; sharpe bias "
        << r.sharpe_bias();
    if (r.bias.bootstrap) log << "; p(return) " << r.bias.bootstrap->p_value_return;
    log << "\n";
    return 0;
}

int cmd_robustness(const RobustnessArgs& args, std::ostream& log) {
    RunManifest m("robustness", args.out);
    std::vector<robustness::ScenarioConfig> scenarios;
    if (args.scenarios) {
        m.add_input(*args.scenarios);
        scenarios = report::scenarios_from_json(report::read_text(*args.scenarios));
    } else {
        scenarios = robustness::default_sweep();
    }
    m.set_config({{"store", args.store.string()},
                  {"scenarios", args.scenarios ? json(args.scenarios->string()) : json("default sweep")},
                  {"official_list", args.official_list ? json(args.official_list->string()) : json(nullptr)},
                  {"bootstrap_n", args.bootstrap_n},
                  {"seed", args.seed},
                  {"subperiods", args.subperiods}});
    m.add_input(args.store);
    auto store = survbias::read_canonical(args.store);
    if (store.calendar().empty()) throw Error(ErrorCode::EmptyWindow, "store " + args.store.string() + " is empty");
    std::vector<std::string> official;
    if (args.official_list) {
        if (std::filesystem::exists(*args.official_list)) {
            m.add_input(*args.official_list);
            official = universe::read_symbol_list(*args.official_list);
        } else {
            log << "warning: official list " << args.official_list->string() << " not found; validation skipped\n";
        }
    }
    m.phase("load");
    emit(m, "scenarios_used.json", report::scenarios_to_json(scenarios));

    robustness::AnalysisOptions opts;
    opts.bootstrap_n = args.bootstrap_n;
    opts.seed = args.seed;
    std::map<std::tuple<int, int, int>, robustness::UniverseState> universes;
    auto state_for = [&](const robustness::ScenarioConfig& c) -> const robustness::UniverseState& {
        auto key = std::make_tuple(c.band.low, c.band.high, static_cast<int>(c.frequency));
        auto it = universes.find(key);
        if (it == universes.end())
            it = universes.emplace(key, robustness::build_universe(store, c.band, c.frequency, opts)).first;
        return it->second;
    };

    std::vector<robustness::ScenarioResult> results;
    for (const auto& c : scenarios) {
        const auto& state = state_for(c);
        auto r = robustness::run_analysis(store, state, c, opts);
        const auto dir = "scenarios/" + safe_label(c.label);
        write_scenario_outputs(m, dir, r);
        emit(m, dir + "/result.json", report::scenario_result_to_json(r));
        if (!official.empty()) {
            universe::ValidationOptions vopts;
            vopts.asof = state.asof;
            vopts.seed = args.seed;
            auto v = universe::validate_reconstruction(state.snapshots.back(), official, state.timelines, vopts);
            emit(m, dir + "/validation.json", report::validation_to_json(v));
        }
        log << c.label << ": bias " << r.return_bias_pp() << "pp, sharpe bias " << r.sharpe_bias() << "\n";
        results.push_back(std::move(r));
        m.phase("scenario:" + c.label);
    }
    emit(m, "comparison.csv", report::comparison_csv(results));

    if (args.subperiods) {
        const auto base_it = std::find_if(scenarios.begin(), scenarios.end(),
                                          [](const auto& c) { return c.label == "baseline"; });
        robustness::ScenarioConfig base = base_it != scenarios.end() ? *base_it : robustness::ScenarioConfig{};
        base.subperiod.reset();
        auto regimes = robustness::default_regimes();
        auto table = robustness::subperiod_table(store, state_for(base), regimes, base);
        emit(m, "subperiods.csv", report::period_rows_csv(table.windows));
        emit(m, "years.csv", report::period_rows_csv(table.years));
        emit(m, "subperiod_summary.json", report::subperiod_summary_to_json(table));
        m.phase("subperiods");
    }
    m.write();
    return 0;
}

int cmd_synth(const SynthArgs& args, std::ostream& log) {
    RunManifest m("synth", args.out);
    survbias::synth::SynthConfig config;
    if (args.config) {
        m.add_input(*args.config);
        config = survbias::synth::config_from_json(report::read_text(*args.config));
    }
    if (args.seed) config.seed = *args.seed;
    config.validate();
    m.set_config(json::parse(survbias::synth::config_to_json(config)));

    auto market = survbias::synth::generate(config);
    m.phase("generate");
    auto paths = market.write_files(args.out / "data");
    for (const auto& p : paths) m.add_output("data/" + p.filename().string());
    emit(m, "truth.json", survbias::synth::truth_to_json(market.truth()));
    std::string list;
    for (const auto& s : market.truth().final_members()) list += s + "\n";
    emit(m, "constituents.txt", list);
    emit(m, "synth_config.json", survbias::synth::config_to_json(config));
    m.phase("write");
    m.write();
    const auto& ev = market.truth().events;
    log << "synth: " << paths.size() << " files, " << market.truth().snapshots.size() << " snapshots, " << ev.deaths
        << " deaths, " << ev.graduations << " graduations, " << ev.demotions << " demotions\n";
    return 0;
}

int cmd_score(const ScoreArgs& args, std::ostream& log) {
    RunManifest m("score", args.out);
    m.set_config({{"synth_dir", args.synth_dir.string()}});
    const auto cfg_path = args.synth_dir / "synth_config.json";
    const auto truth_path = args.synth_dir / "truth.json";
    m.add_input(cfg_path);
    m.add_input(truth_path);
    auto config = survbias::synth::config_from_json(report::read_text(cfg_path));
    auto truth = survbias::synth::truth_from_json(report::read_text(truth_path));

    auto ingested = survbias::ingest_directory(args.synth_dir / "data");
    m.phase("ingest");
    robustness::AnalysisOptions opts;
    opts.bootstrap_n = 0;
    auto state = robustness::build_universe(ingested.store, config.band, universe::Frequency::Quarterly, opts);
    robustness::ScenarioConfig ew, vw;
    ew.band = vw.band = config.band;
    vw.weighting.kind = portfolio::WeightKind::ValueWeight;
    auto rew = robustness::run_analysis(ingested.store, state, ew, opts);
    auto rvw = robustness::run_analysis(ingested.store, state, vw, opts);
    m.phase("pipeline");

    survbias::synth::PipelineOutputs out{state.snapshots,          state.timelines,         &rew.survivor_series,
                                         &rew.complete_series,     &rvw.survivor_series,    &rvw.complete_series};
    auto acc = survbias::synth::score_pipeline(out, truth);
    emit(m, "accuracy.json", survbias::synth::report_to_json(acc));
    m.write();
    double worst = 0.0;
    for (const auto& s : acc.series) worst = std::max(worst, s.max_abs_deviation);
    log << "score: min quarter overlap " << acc.min_overlap_pct << "%, classification agreements "
        << acc.classification_agreements() << "/" << truth.classification.size() << ", max series deviation "
        << worst << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Survivorship-bias toolkit for mid-cap equity universes"};
    app.name(args.empty() ? "sbias" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);
    app.set_version_flag("--version", SBIAS_VERSION);

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Parse daily bhavcopy files into the canonical store");
    ingest->add_option("--data-dir", ia.data_dir, "Directory of daily CSV files")->required();
    ingest->add_option("--out", ia.out, "Output directory")->required();

    ReconstructArgs ra;
    std::string r_band = "151:400", r_freq = "quarterly", r_list;
    auto* recon = app.add_subcommand("reconstruct", "Rebuild point-in-time constituents and timelines");
    recon->add_option("--store", ra.store, "Canonical store CSV")->required();
    recon->add_option("--band", r_band, "Rank band low:high")->capture_default_str();
    recon->add_option("--frequency", r_freq, "quarterly or semiannual")->capture_default_str();
    recon->add_option("--official-list", r_list, "Current constituent list (one symbol per line)");
    recon->add_option("--seed", ra.seed, "Seed for validation spot checks")->capture_default_str();
    recon->add_option("--out", ra.out, "Output directory")->required();

    AnalyzeArgs aa;
    std::string a_weight = "equal", a_clip = "none", a_agg = "daily";
    std::optional<double> a_terminal;
    auto* analyze = app.add_subcommand("analyze", "Backtest both universes and quantify the bias");
    analyze->add_option("--store", aa.store, "Canonical store CSV")->required();
    analyze->add_option("--timelines", aa.timelines, "timelines.json from reconstruct")->required();
    analyze->add_option("--weighting", a_weight, "equal or value")->capture_default_str();
    analyze->add_option("--clip", a_clip, "Per-stock return clip low:high, or none")->capture_default_str();
    analyze->add_option("--aggregation", a_agg, "daily or buy_and_hold")->capture_default_str();
    analyze->add_option("--delist-terminal", a_terminal, "Terminal return for delisted stocks, in [-1, 0]");
    analyze->add_option("--bootstrap-n", aa.bootstrap_n, "Bootstrap resamples (0 skips p-values)")
        ->capture_default_str();
    analyze->add_option("--seed", aa.seed, "Bootstrap seed")->capture_default_str();
    analyze->add_option("--out", aa.out, "Output directory")->required();

    RobustnessArgs rb;
    std::string rb_scen, rb_list;
    bool rb_no_sub = false;
    auto* robust = app.add_subcommand("robustness", "Run a scenario sweep and sub-period table");
    robust->add_option("--store", rb.store, "Canonical store CSV")->required();
    robust->add_option("--scenarios", rb_scen, "Scenario JSON file (default: built-in sweep)");
    robust->add_option("--official-list", rb_list, "Current constituent list for per-scenario validation");
    robust->add_option("--bootstrap-n", rb.bootstrap_n, "Bootstrap resamples per scenario")->capture_default_str();
    robust->add_option("--seed", rb.seed, "Bootstrap seed")->capture_default_str();
    robust->add_flag("--no-subperiods", rb_no_sub, "Skip the regime and calendar-year table");
    robust->add_option("--out", rb.out, "Output directory")->required();

    SynthArgs sa;
    std::string s_config;
    std::optional<std::uint64_t> s_seed;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic market with ground truth");
    synth->add_option("--config", s_config, "Synth config JSON (default config when omitted)");
    synth->add_option("--seed", s_seed, "Overrides the config seed");
    synth->add_option("--out", sa.out, "Output directory")->required();

    ScoreArgs sc;
    auto* score = app.add_subcommand("score", "Run the pipeline on a synth directory and score it against truth");
    score->add_option("--synth-dir", sc.synth_dir, "Output directory of a synth run")->required();
    score->add_option("--out", sc.out, "Output directory")->required();

    try {
        std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
        std::reverse(rev.begin(), rev.end());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << SBIAS_VERSION << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(ia, err);
        if (*recon) {
            ra.band = parse_band(r_band);
            auto f = universe::parse_frequency(r_freq);
            if (!f) throw Error(ErrorCode::InvalidConfig, "unknown frequency '" + r_freq + "'");
            ra.frequency = *f;
            if (!r_list.empty()) ra.official_list = r_list;
            return cmd_reconstruct(ra, err);
        }
        if (*analyze) {
            auto w = portfolio::parse_weight_kind(a_weight);
            if (!w) throw Error(ErrorCode::InvalidConfig, "unknown weighting '" + a_weight + "'");
            aa.weighting = {*w, parse_clip(a_clip)};
            auto g = portfolio::parse_aggregation(a_agg);
            if (!g) throw Error(ErrorCode::InvalidConfig, "unknown aggregation '" + a_agg + "'");
            aa.aggregation = *g;
            aa.delist_terminal = a_terminal;
            return cmd_analyze(aa, err);
        }
        if (*robust) {
            if (!rb_scen.empty()) rb.scenarios = rb_scen;
            if (!rb_list.empty()) rb.official_list = rb_list;
            rb.subperiods = !rb_no_sub;
            return cmd_robustness(rb, err);
        }
        if (*synth) {
            if (!s_config.empty()) sa.config = s_config;
            sa.seed = s_seed;
            return cmd_synth(sa, err);
        }
        if (*score) return cmd_score(sc, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace sbias
