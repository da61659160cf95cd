#pragma once

#include "prm/gridworld.hpp"

#include <thread>

namespace prm {

struct EpisodeSettings {
    std::size_t n_episode = 100;
    std::set<Label> terminal_labels;  // an episode stops after a step with one of these labels
};

/// Independent generator for episode `index` of a run seeded with `seed`, so
/// results do not depend on how episodes are split across threads.
inline Rng episode_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

inline std::size_t sample_action(const ActionDistribution& d, Rng& rng) {
    return sample_index(d, [](double p) { return p; }, rng);
}

inline EpisodeTrace run_episode(const Nmdp& m, const Policy& pi, const EpisodeSettings& settings, Rng& rng,
                                Trajectory* trajectory = nullptr) {
    EpisodeTrace trace;
    std::vector<std::size_t> states{m.initial()}, actions;
    RewardTracker tracker(m);
    std::size_t x = m.initial();
    for (std::size_t k = 0; k < settings.n_episode; ++k) {
        auto a = sample_action(policy_distribution(pi, states, actions), rng);
        auto res = step(m, x, a, tracker, rng);
        trace.push_back({res.label, res.reward});
        actions.push_back(a);
        states.push_back(res.next);
        x = res.next;
        if (settings.terminal_labels.contains(res.label)) break;
    }
    if (trajectory) {
        trajectory->states = std::move(states);
        trajectory->actions = std::move(actions);
        trajectory->labels = label_word(trace);
        trajectory->rewards.clear();
        for (const auto& s : trace) trajectory->rewards.push_back(s.reward);
    }
    return trace;
}

/// Rolls out `count` episodes; episode i always uses episode_rng(seed, i).
inline std::vector<EpisodeTrace> collect_traces(const Nmdp& m, const Policy& pi, const EpisodeSettings& settings,
                                                std::size_t count, std::uint64_t seed, unsigned jobs = 1) {
    std::vector<EpisodeTrace> traces(count);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < count; i += stride) {
            auto rng = episode_rng(seed, i);
            traces[i] = run_episode(m, pi, settings, rng);
        }
    };
    jobs = std::max(1U, jobs);
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    }
    return traces;
}

// Trace log: one episode per line, fields "<label>;<reward>;<label>;<reward>...".

inline std::string format_trace_log(const AtomicPropositions& ap, const std::vector<EpisodeTrace>& traces) {
    std::string out;
    for (const auto& t : traces) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) out += ';';
            out += ap.format(t[i].label);
            out += ';';
            out += format_number(t[i].reward);
        }
        out += '\n';
    }
    return out;
}

inline std::vector<EpisodeTrace> parse_trace_log(const AtomicPropositions& ap, std::string_view text) {
    std::vector<EpisodeTrace> traces;
    std::size_t lineno = 0;
    for (auto line : detail::lines(text)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        EpisodeTrace t;
        if (!line.empty()) {
            std::vector<std::string_view> fields;
            std::size_t start = 0;
            while (true) {
                auto semi = line.find(';', start);
                fields.push_back(line.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start));
                if (semi == std::string_view::npos) break;
                start = semi + 1;
            }
            if (fields.size() % 2 != 0)
                throw Error("trace log line " + std::to_string(lineno) + ": odd number of fields");
            try {
                for (std::size_t i = 0; i < fields.size(); i += 2)
                    t.push_back({ap.parse_label(fields[i]), parse_number(fields[i + 1])});
            } catch (const Error& e) {
                throw Error("trace log line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        traces.push_back(std::move(t));
    }
    return traces;
}

/// Office environment assembled from a config file with keys
/// map, truth_prm, n_episode, terminal_labels, seed.
struct Environment {
    OfficeWorld world;
    EpisodeSettings episode;
    std::uint64_t seed = 0;

    [[nodiscard]] const Nmdp& nmdp() const { return world.nmdp; }
    [[nodiscard]] const RewardMachine& truth() const { return *world.nmdp.truth(); }
};

inline Environment load_environment(const std::filesystem::path& config_path) {
    auto base = config_path.parent_path();
    std::map<std::string, std::string> kv;
    std::size_t lineno = 0;
    const auto text = read_text_file(config_path);
    for (auto raw : detail::lines(text)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw Error(config_path.string() + ":" + std::to_string(lineno) + ": expected 'key: value'");
        auto key = std::string(detail::trim(line.substr(0, colon)));
        if (key != "map" && key != "truth_prm" && key != "n_episode" && key != "terminal_labels" && key != "seed")
            throw Error(config_path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        kv[key] = std::string(detail::trim(line.substr(colon + 1)));
    }
    for (auto required : {"map", "truth_prm"})
        if (!kv.contains(required)) throw Error(config_path.string() + ": missing key '" + required + "'");

    auto resolve = [&](const std::string& p) { return std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base / p; };
    auto truth = load_machine(resolve(kv["truth_prm"]));
    auto map = load_gridmap(read_text_file(resolve(kv["map"])));
    Environment env{build_office_nmdp(map, truth), {}, 0};
    if (kv.contains("n_episode")) env.episode.n_episode = static_cast<std::size_t>(parse_number(kv["n_episode"]));
    if (kv.contains("seed")) env.seed = static_cast<std::uint64_t>(parse_number(kv["seed"]));
    if (kv.contains("terminal_labels"))
        for (auto& l : detail::split(kv["terminal_labels"], ',')) env.episode.terminal_labels.insert(truth.ap().parse_label(l));
    if (env.episode.n_episode == 0) throw Error("n_episode must be positive");
    return env;
}

}  // namespace prm
