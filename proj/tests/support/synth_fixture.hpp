#pragma once

#include "survbias/store.hpp"
#include "survbias/synth.hpp"

#include <map>
#include <memory>
#include <string>

namespace survbias::tsupport {

/// Generated market plus the store the pipeline would see after ingest.
struct SynthData {
    synth::SynthMarket market;
    RecordStore store;
};

/// Memoised by label so several tests can share one generation.
inline const SynthData& synth_data(const std::string& label, const synth::SynthConfig& config) {
    static std::map<std::string, std::unique_ptr<SynthData>> cache;
    auto& slot = cache[label];
    if (!slot) {
        auto market = synth::generate(config);
        auto records = market.equity_records();
        auto store = RecordStore::from_records(records);
        slot = std::make_unique<SynthData>(SynthData{std::move(market), std::move(store)});
    }
    return *slot;
}

inline const SynthData& default_synth() { return synth_data("default", synth::SynthConfig{}); }

inline const SynthData& no_churn_synth() { return synth_data("no_churn", synth::SynthConfig::no_churn()); }

/// Higher hazard so a dataset carries plenty of delisted stocks.
inline synth::SynthConfig high_hazard_config() {
    synth::SynthConfig c;
    c.churn.delist_hazard = 0.06;
    c.seed = 7;
    return c;
}

}  // namespace survbias::tsupport
