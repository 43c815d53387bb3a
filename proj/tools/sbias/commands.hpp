#pragma once

#include "survbias/portfolio.hpp"
#include "survbias/universe.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sbias {

namespace fs = std::filesystem;

struct IngestArgs {
    fs::path data_dir;
    fs::path out;
};

struct ReconstructArgs {
    fs::path store;
    survbias::universe::RankBand band{};
    survbias::universe::Frequency frequency = survbias::universe::Frequency::Quarterly;
    std::optional<fs::path> official_list;
    std::uint64_t seed = 42;
    fs::path out;
};

struct AnalyzeArgs {
    fs::path store;
    fs::path timelines;
    survbias::portfolio::WeightScheme weighting{};
    survbias::portfolio::Aggregation aggregation = survbias::portfolio::Aggregation::DailyRebalanced;
    std::optional<double> delist_terminal;
    std::size_t bootstrap_n = 1000;
    std::uint64_t seed = 42;
    fs::path out;
};

struct RobustnessArgs {
    fs::path store;
    std::optional<fs::path> scenarios;
    std::optional<fs::path> official_list;
    std::size_t bootstrap_n = 1000;
    std::uint64_t seed = 42;
    bool subperiods = true;
    fs::path out;
};

struct SynthArgs {
    std::optional<fs::path> config;
    std::optional<std::uint64_t> seed;
    fs::path out;
};

struct ScoreArgs {
    fs::path synth_dir;
    fs::path out;
};

// Each command writes its outputs plus manifest.json under `out` and
// returns the process exit code. Failures throw survbias::Error.
int cmd_ingest(const IngestArgs& args, std::ostream& log);
int cmd_reconstruct(const ReconstructArgs& args, std::ostream& log);
int cmd_analyze(const AnalyzeArgs& args, std::ostream& log);
int cmd_robustness(const RobustnessArgs& args, std::ostream& log);
int cmd_synth(const SynthArgs& args, std::ostream& log);
int cmd_score(const ScoreArgs& args, std::ostream& log);

/// Parses argv-style arguments (args[0] is the program name) and dispatches.
/// Exit codes: 0 success, 1 pipeline error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "151:400" style pair. Throws InvalidConfig.
survbias::universe::RankBand parse_band(const std::string& text);
/// "-0.5:1.0" or "none".
std::optional<survbias::portfolio::ClipBounds> parse_clip(const std::string& text);

}  // namespace sbias
