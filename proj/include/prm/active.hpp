#pragma once

#include "prm/episode.hpp"
#include "prm/hypothesis.hpp"
#include "prm/semantics.hpp"

#include <chrono>

namespace prm {

/// Tabular Q(y, x, a); unseen entries read as 0.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t machine_states, std::size_t env_states, std::size_t actions) { reshape(machine_states, env_states, actions); }

    /// Resets the table when the shape changes; keeps values otherwise.
    void reshape(std::size_t machine_states, std::size_t env_states, std::size_t actions) {
        if (machine_states == ny_ && env_states == nx_ && actions == na_) return;
        ny_ = machine_states;
        nx_ = env_states;
        na_ = actions;
        values_.assign(ny_ * nx_ * na_, 0.0);
    }

    void reset() { std::fill(values_.begin(), values_.end(), 0.0); }

    [[nodiscard]] double get(std::size_t y, std::size_t x, std::size_t a) const { return values_.at((y * nx_ + x) * na_ + a); }
    double& at(std::size_t y, std::size_t x, std::size_t a) { return values_.at((y * nx_ + x) * na_ + a); }

    [[nodiscard]] double max_value(std::size_t y, std::size_t x, const std::vector<std::size_t>& actions) const {
        double best = -std::numeric_limits<double>::infinity();
        for (auto a : actions) best = std::max(best, get(y, x, a));
        return actions.empty() ? 0.0 : best;
    }

    [[nodiscard]] std::size_t machine_states() const { return ny_; }

private:
    std::size_t ny_ = 0, nx_ = 0, na_ = 0;
    std::vector<double> values_;
};

enum class QueryMode { Membership, Equivalence };
enum class MachineAdvance { Sample, Argmax };

struct LearnerConfig {
    std::uint64_t n_check = 200;
    std::size_t n_query = 500;
    std::size_t n_stop = 50;
    std::size_t n_episode = 100;
    double learn_rate = 0.5;  // Q-learning step size (not the Hoeffding confidence)
    double discount = 0.9;
    double explore = 0.1;
    std::uint64_t seed = 0;
    std::size_t max_rounds = 200;     // equivalence rounds before giving up
    std::size_t max_repairs = 2000;   // closedness/consistency repairs before giving up
    std::size_t max_experiment_len = 12;  // counterexample suffixes added to E
    std::uint64_t evidence_threshold = 0;  // see ObservationTable; 0 keeps plain Diff compatibility
    RhoConvention rho = RhoConvention::Target;
    MachineAdvance machine_advance = MachineAdvance::Sample;
    std::set<Label> terminal_labels;
    std::optional<std::vector<Label>> alphabet;  // default: labels the environment can emit

    void validate() const {
        if (n_check == 0 || n_query == 0 || n_stop == 0 || n_episode == 0) throw Error("budgets must be positive");
        if (!(learn_rate > 0 && learn_rate <= 1)) throw Error("learn_rate must lie in (0, 1]");
        if (!(discount > 0 && discount < 1)) throw Error("discount must lie in (0, 1)");
        if (!(explore >= 0 && explore <= 1)) throw Error("explore must lie in [0, 1]");
    }
};

inline std::size_t epsilon_greedy_action(const QTable& q, const Nmdp& m, std::size_t y, std::size_t x, double explore,
                                         Rng& rng) {
    auto avail = m.available_actions(x);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (explore > 0 && unif(rng) < explore) {
        std::uniform_int_distribution<std::size_t> pick(0, avail.size() - 1);
        return avail[pick(rng)];
    }
    double best = q.max_value(y, x, avail);
    std::vector<std::size_t> ties;
    for (auto a : avail)
        if (q.get(y, x, a) == best) ties.push_back(a);
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ties[pick(rng)];
}

inline std::size_t advance_machine(const Edge& e, MachineAdvance how, Rng& rng) {
    if (how == MachineAdvance::Sample) return sample_successor(e, rng);
    auto it = std::max_element(e.successors.begin(), e.successors.end(),
                               [](const auto& a, const auto& b) { return a.prob < b.prob; });
    return it->state;
}

/// One Q-learning episode on M × H. In membership mode the update uses the
/// machine's reward ϱ(y, ℓ); in equivalence mode the environment's reward.
/// The returned trace always carries the environment's rewards.
inline EpisodeTrace teacher_query(QTable& q, const Nmdp& m, const RewardMachine& h, QueryMode mode,
                                  const LearnerConfig& cfg, Rng& rng) {
    q.reshape(h.state_count(), m.state_count(), m.action_count());
    EpisodeTrace trace;
    RewardTracker tracker(m);
    std::size_t x = m.initial(), y = h.initial();
    for (std::size_t k = 0; k < cfg.n_episode; ++k) {
        auto a = epsilon_greedy_action(q, m, y, x, cfg.explore, rng);
        auto res = step(m, x, a, tracker, rng);
        trace.push_back({res.label, res.reward});
        const Edge* e = h.edge(y, res.label);
        if (!e) throw Error("machine is undefined on (" + h.state_name(y) + ", " + h.ap().format(res.label) + ")");
        auto y_next = advance_machine(*e, cfg.machine_advance, rng);
        const double r = mode == QueryMode::Membership ? e->reward : res.reward;
        const bool terminal = cfg.terminal_labels.contains(res.label);
        const double future = terminal ? 0.0 : q.max_value(y_next, res.next, m.available_actions(res.next));
        double& entry = q.at(y, x, a);
        entry = (1 - cfg.learn_rate) * entry + cfg.learn_rate * (r + cfg.discount * future);
        x = res.next;
        y = y_next;
        if (terminal) break;
    }
    return trace;
}

/// Greedy (ε = 0) rollout of `q` on M × H; returns the machine's total reward.
inline double greedy_machine_return(const QTable& q, const Nmdp& m, const RewardMachine& h, const LearnerConfig& cfg,
                                    Rng& rng, EpisodeTrace* trace = nullptr) {
    RewardTracker tracker(m);
    std::size_t x = m.initial(), y = h.initial();
    double total = 0;
    for (std::size_t k = 0; k < cfg.n_episode; ++k) {
        auto a = epsilon_greedy_action(q, m, y, x, 0.0, rng);
        auto res = step(m, x, a, tracker, rng);
        if (trace) trace->push_back({res.label, res.reward});
        const Edge* e = h.edge(y, res.label);
        total += e->reward;
        y = advance_machine(*e, cfg.machine_advance, rng);
        x = res.next;
        if (cfg.terminal_labels.contains(res.label)) break;
    }
    return total;
}

/// Primes Q-learning with H_ζ and records every episode until ζ has been
/// sampled N_check times or N_query episodes have run. Returns the episode count.
inline std::size_t membership_query(ObservationTable& table, const Word& zeta, const Nmdp& m, QTable& q_m,
                                    const LearnerConfig& cfg, Rng& rng) {
    auto h = membership_reward_machine(m.ap(), zeta);
    q_m.reshape(0, 0, 0);  // a new query word starts from a fresh table
    std::size_t counter = 0;
    while (table.sample(zeta) < cfg.n_check && counter < cfg.n_query) {
        table.record(teacher_query(q_m, m, h, QueryMode::Membership, cfg, rng));
        ++counter;
    }
    return counter;
}

/// Checks whether the empirical reward distribution differs from a model
/// distribution by more than the Hoeffding radius for equal sample sizes.
inline bool differs_from_distribution(const FreqMap& observed, const RewardDistribution& model, double total_samples) {
    const auto n = total_count(observed);
    if (n == 0) return false;
    const double eps = hoeffding_threshold(n, n, total_samples);
    auto observed_freq = [&](Reward r) {
        auto it = observed.find(r);
        return it == observed.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
    };
    for (auto [r, c] : observed) {
        auto it = model.find(r);
        if (std::abs(observed_freq(r) - (it == model.end() ? 0.0 : it->second)) > eps) return true;
    }
    for (auto [r, p] : model)
        if (std::abs(observed_freq(r) - p) > eps) return true;
    return false;
}

/// Length of the shortest prefix of λ that refutes the hypothesis, if any.
/// A prefix refutes it when it leads into ⊥ although it has been sampled
/// N_check times, or when its recorded reward frequencies are statistically
/// different from the hypothesis' next-reward distribution.
inline std::optional<std::size_t> counterexample_length(const ObservationTable& table, const RewardMachine& hypothesis,
                                                        const EpisodeTrace& trace, std::uint64_t n_check) {
    const auto failure = hypothesis.failure_state();
    const double total = static_cast<double>(std::max<std::uint64_t>(table.total_samples(), 1));
    Eigen::RowVectorXd v = initial_vector(hypothesis);
    Word w;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const Label l = trace[k].label;
        w.push_back(l);
        const auto* node = table.find(w);
        const Matrix hl = label_matrix(hypothesis, l);
        Eigen::RowVectorXd next = v * hl;
        const double mass = next.sum();
        if (!(mass > 0)) return std::nullopt;  // unreachable in the hypothesis
        if (failure && next(static_cast<Eigen::Index>(*failure)) > 0) {
            if (node && node->sample >= n_check) return k + 1;
            return std::nullopt;  // everything beyond is ⊥ as well
        }
        if (node && node->total > 0) {
            RewardDistribution model;
            for (std::size_t i = 0; i < hypothesis.state_count(); ++i) {
                if (v(static_cast<Eigen::Index>(i)) == 0) continue;
                if (const Edge* e = hypothesis.edge(i, l)) model[e->reward] += v(static_cast<Eigen::Index>(i)) / v.sum();
            }
            if (differs_from_distribution(node->freq, model, total)) return k + 1;
        }
        v = next;
    }
    return std::nullopt;
}

inline bool is_counterexample(const ObservationTable& table, const RewardMachine& hypothesis, const EpisodeTrace& trace,
                              std::uint64_t n_check) {
    return counterexample_length(table, hypothesis, trace, n_check).has_value();
}

struct EquivalenceResult {
    std::optional<Word> counterexample;
    std::size_t episodes = 0;
    RewardMachine hypothesis;
};

/// Builds the hypothesis, then runs up to N_stop Q-learning episodes on
/// M × H, recording every trace, until one of them is a counterexample.
inline EquivalenceResult equivalence_query(ObservationTable& table, const Nmdp& m, QTable& q_h,
                                           const LearnerConfig& cfg, Rng& rng) {
    EquivalenceResult res{std::nullopt, 0, build_hypothesis(table, {cfg.n_check, cfg.rho})};
    while (res.episodes < cfg.n_stop) {
        ++res.episodes;
        auto trace = teacher_query(q_h, m, res.hypothesis, QueryMode::Equivalence, cfg, rng);
        table.record(trace);
        if (auto len = counterexample_length(table, res.hypothesis, trace, cfg.n_check)) {
            res.counterexample = prefix(label_word(trace), *len);
            break;
        }
    }
    return res;
}

struct RoundReport {
    std::size_t membership_queries = 0;
    std::size_t membership_episodes = 0;
    std::size_t equivalence_episodes = 0;
    std::optional<Word> counterexample;
    std::size_t samples = 0;      // |S|
    std::size_t experiments = 0;  // |E|
    std::size_t hypothesis_states = 0;
};

struct ActiveResult {
    RewardMachine hypothesis;
    ObservationTable table;
    std::vector<RoundReport> rounds;
    bool budget_exhausted = false;
    double seconds = 0.0;
};

inline std::string format_report(const AtomicPropositions& ap, const ActiveResult& r) {
    std::ostringstream out;
    std::size_t mq = 0, me = 0, ee = 0, cex = 0;
    for (const auto& rd : r.rounds) {
        mq += rd.membership_queries;
        me += rd.membership_episodes;
        ee += rd.equivalence_episodes;
        cex += rd.counterexample ? 1 : 0;
    }
    out << "rounds: " << r.rounds.size() << "\nmembership_queries: " << mq << "\nmembership_episodes: " << me
        << "\nequivalence_episodes: " << ee << "\ncounterexamples: " << cex << "\nS: " << r.table.samples().size()
        << "\nE: " << r.table.experiments().size() << "\nhypothesis_states: " << r.hypothesis.state_count()
        << "\nbudget_exhausted: " << (r.budget_exhausted ? "true" : "false") << "\n\n"
        << "round,membership_queries,membership_episodes,equivalence_episodes,counterexample,S,E,hypothesis_states\n";
    for (std::size_t i = 0; i < r.rounds.size(); ++i) {
        const auto& rd = r.rounds[i];
        out << i + 1 << ',' << rd.membership_queries << ',' << rd.membership_episodes << ',' << rd.equivalence_episodes
            << ',' << (rd.counterexample ? ap.format(*rd.counterexample) : "-") << ',' << rd.samples << ','
            << rd.experiments << ',' << rd.hypothesis_states << '\n';
    }
    return out.str();
}

/// RL-primed active inference: repair consistency and closedness with
/// membership queries, then look for counterexamples with equivalence
/// queries. A counterexample adds its prefixes to S and its suffixes to E.
/// Stops after N_stop consecutive equivalence rounds without a
/// counterexample, or when a budget runs out.
inline ActiveResult learn_active(const Nmdp& m, const LearnerConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    Rng rng(cfg.seed);
    auto alphabet = cfg.alphabet ? *cfg.alphabet : m.label_range();
    ObservationTable table(m.ap(), alphabet, cfg.evidence_threshold);
    QTable q_m, q_h;
    ActiveResult result{RewardMachine(m.ap(), {0.0}), table, {}, false, 0.0};

    std::vector<Word> extensions{Word{}};  // ε ∪ Σ
    for (auto l : alphabet) extensions.push_back(Word{l});

    RoundReport round;
    auto ask = [&](const std::vector<Word>& queries) {
        for (const auto& zeta : queries) {
            if (zeta.empty()) continue;
            ++round.membership_queries;
            round.membership_episodes += membership_query(table, zeta, m, q_m, cfg, rng);
        }
    };
    auto rows_of = [&](const Word& s) {
        std::vector<Word> qs;
        for (const auto& x : extensions)
            for (const auto& e : table.experiments()) qs.push_back(concat(concat(s, x), e));
        return qs;
    };

    std::size_t clean_rounds = 0, repairs = 0;
    while (clean_rounds < cfg.n_stop) {
        if (result.rounds.size() >= cfg.max_rounds || repairs >= cfg.max_repairs) {
            result.budget_exhausted = true;
            break;
        }
        while (true) {
            if (auto w = table.consistency_witness()) {
                Word col = concat(Word{w->label}, w->experiment);
                table.add_experiment(col);
                std::vector<Word> qs;
                for (const auto& s : table.samples())
                    for (const auto& x : extensions) qs.push_back(concat(concat(s, x), col));
                ask(qs);
            } else if (auto sl = table.closedness_witness()) {
                table.add_sample_word(*sl);
                ask(rows_of(*sl));
            } else {
                break;
            }
            if (++repairs >= cfg.max_repairs) break;
        }
        if (repairs >= cfg.max_repairs) continue;

        auto eq = equivalence_query(table, m, q_h, cfg, rng);
        round.equivalence_episodes = eq.episodes;
        round.counterexample = eq.counterexample;
        round.hypothesis_states = eq.hypothesis.state_count();
        result.hypothesis = std::move(eq.hypothesis);
        if (round.counterexample) {
            clean_rounds = 0;
            std::vector<Word> fresh;
            for (std::size_t k = 1; k <= round.counterexample->size(); ++k) {
                Word p = prefix(*round.counterexample, k);
                if (!table.samples().contains(p)) {
                    table.add_sample_word(p);
                    fresh.push_back(p);
                }
            }
            std::vector<Word> columns;
            for (std::size_t k = 0; k < round.counterexample->size(); ++k) {
                Word e(round.counterexample->begin() + static_cast<std::ptrdiff_t>(k), round.counterexample->end());
                if (e.size() <= cfg.max_experiment_len && !table.experiments().contains(e)) {
                    table.add_experiment(e);
                    columns.push_back(e);
                }
            }
            for (const auto& p : fresh) ask(rows_of(p));
            for (const auto& e : columns) {
                std::vector<Word> qs;
                for (const auto& s : table.samples())
                    for (const auto& x : extensions) qs.push_back(concat(concat(s, x), e));
                ask(qs);
            }
        } else {
            ++clean_rounds;
        }
        round.samples = table.samples().size();
        round.experiments = table.experiments().size();
        result.rounds.push_back(std::move(round));
        round = RoundReport{};
    }
    result.table = std::move(table);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace prm
