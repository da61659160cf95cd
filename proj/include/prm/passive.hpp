#pragma once

#include "prm/episode.hpp"
#include "prm/hypothesis.hpp"

namespace prm {

struct PassiveConfig {
    std::uint64_t n_check = 20;
    std::size_t max_experiment_len = 12;  // longer suffixes are not added to E
    std::size_t max_repairs = 100000;
    RhoConvention rho = RhoConvention::Target;
    std::optional<std::vector<Label>> alphabet;  // default: every label over AP
};

struct PassiveResult {
    ObservationTable table;
    RewardMachine hypothesis;
    std::size_t traces = 0;
    std::size_t dropped_suffixes = 0;  // suffixes over max_experiment_len
    std::size_t closing_steps = 0;     // words added to S while closing
    std::size_t consistency_steps = 0; // columns added to repair consistency
};

/// Closes the table, then repairs consistency by adding witness columns and
/// closes again, until both hold. Returns (closing steps, consistency steps).
inline std::pair<std::size_t, std::size_t> complete_table(ObservationTable& table, std::size_t max_repairs = 100000) {
    std::size_t closing = 0, consistency = 0;
    while (true) {
        if (closing + consistency >= max_repairs)
            throw BudgetExceeded("table completion needed more than " + std::to_string(max_repairs) + " repairs");
        if (auto sl = table.closedness_witness()) {
            table.add_sample_word(*sl);
            ++closing;
        } else if (auto w = table.consistency_witness()) {
            table.add_experiment(concat(Word{w->label}, w->experiment));
            ++consistency;
        } else {
            break;
        }
    }
    return {closing, consistency};
}

/// Passive learning of the reward signal behind a fixed set of traces.
inline PassiveResult learn_passive(const AtomicPropositions& ap, const std::vector<EpisodeTrace>& traces,
                                   const PassiveConfig& cfg = {}) {
    PassiveResult res{ObservationTable(ap, cfg.alphabet, cfg.n_check), RewardMachine(ap, {0.0})};
    res.traces = traces.size();
    for (const auto& trace : traces) {
        auto w = label_word(trace);
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w.size() - i > cfg.max_experiment_len) {
                ++res.dropped_suffixes;
                continue;
            }
            res.table.add_experiment(Word(w.begin() + static_cast<std::ptrdiff_t>(i), w.end()));
        }
        res.table.record(trace);
    }
    std::tie(res.closing_steps, res.consistency_steps) = complete_table(res.table, cfg.max_repairs);
    res.hypothesis = build_hypothesis(res.table, {cfg.n_check, cfg.rho});
    return res;
}

/// Rolls out `episodes` episodes of π on m (episode i seeded by
/// episode_rng(seed, i)) and learns from the resulting traces.
inline PassiveResult learn_passive(const Nmdp& m, const Policy& pi, std::size_t episodes,
                                   const EpisodeSettings& settings, std::uint64_t seed, const PassiveConfig& cfg = {},
                                   unsigned jobs = 1) {
    if (episodes == 0) throw Error("episode count must be positive");
    return learn_passive(m.ap(), collect_traces(m, pi, settings, episodes, seed, jobs), cfg);
}

inline std::string format_passive_report(const PassiveResult& r) {
    std::ostringstream out;
    out << "traces: " << r.traces << "\nS: " << r.table.samples().size() << "\nE: " << r.table.experiments().size()
        << "\nclosing_steps: " << r.closing_steps << "\nconsistency_steps: " << r.consistency_steps
        << "\ndropped_suffixes: " << r.dropped_suffixes << "\nhypothesis_states: " << r.hypothesis.state_count()
        << '\n';
    return out.str();
}

}  // namespace prm
