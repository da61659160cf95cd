#pragma once

#include "prm/machine.hpp"

#include <functional>
#include <set>
#include <span>
#include <variant>

namespace prm {

struct Outcome {
    std::size_t next = 0;
    double prob = 0.0;
    Label label;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Reward process driven by a hidden total machine advanced on transition labels.
struct PrmBacked {
    RewardMachine machine;
};

/// Reward process given as an explicit table: label history ↦ distribution
/// of the reward for the last transition.
struct TableBacked {
    std::map<Word, RewardDistribution> distributions;
};

using RewardSource = std::variant<PrmBacked, TableBacked>;

/// Non-Markovian decision process (X, x_I, A, p, AP, L, R). Transitions are
/// stored per (state, action); an empty outcome list means the action is
/// unavailable at that state.
class Nmdp {
public:
    Nmdp(AtomicPropositions ap, std::vector<std::string> state_names, std::vector<std::string> action_names,
         std::size_t init, RewardSource reward)
        : ap_(std::move(ap)),
          states_(std::move(state_names)),
          actions_(std::move(action_names)),
          init_(init),
          reward_(std::move(reward)),
          outcomes_(states_.size() * actions_.size()) {
        if (states_.empty() || actions_.empty()) throw Error("an NMDP needs at least one state and one action");
        if (init_ >= states_.size()) throw Error("initial state out of range");
        if (const auto* pb = std::get_if<PrmBacked>(&reward_)) {
            if (!pb->machine.is_total()) throw Error("the reward machine of an NMDP must be total");
            if (!(pb->machine.ap() == ap_)) throw Error("reward machine and NMDP disagree on atomic propositions");
        } else {
            for (const auto& [w, dist] : std::get<TableBacked>(reward_).distributions) {
                double total = 0;
                for (auto [r, p] : dist) total += p;
                if (std::abs(total - 1.0) > kProbabilityTolerance)
                    throw Error("reward distribution for '" + ap_.format(w) + "' does not sum to 1");
            }
        }
    }

    void set_transition(std::size_t x, std::size_t a, std::vector<Outcome> outs) {
        check(x, a);
        double total = 0;
        std::vector<Outcome> kept;
        for (const auto& o : outs) {
            if (o.next >= states_.size()) throw Error("successor state out of range");
            if (!(o.prob >= 0)) throw Error("negative transition probability");
            if (!ap_.valid(o.label)) throw Error("transition label outside the alphabet");
            total += o.prob;
            if (o.prob > 0) kept.push_back(o);
        }
        if (!kept.empty() && std::abs(total - 1.0) > kProbabilityTolerance)
            throw Error("p(" + states_[x] + ", " + actions_[a] + ") sums to " + format_number(total));
        std::sort(kept.begin(), kept.end(), [](const auto& l, const auto& r) { return l.next < r.next; });
        outcomes_[x * actions_.size() + a] = std::move(kept);
    }

    [[nodiscard]] const std::vector<Outcome>& outcomes(std::size_t x, std::size_t a) const {
        check(x, a);
        return outcomes_[x * actions_.size() + a];
    }

    [[nodiscard]] bool available(std::size_t x, std::size_t a) const { return !outcomes(x, a).empty(); }

    [[nodiscard]] std::vector<std::size_t> available_actions(std::size_t x) const {
        std::vector<std::size_t> out;
        for (std::size_t a = 0; a < actions_.size(); ++a)
            if (available(x, a)) out.push_back(a);
        return out;
    }

    [[nodiscard]] double probability(std::size_t x, std::size_t a, std::size_t next) const {
        for (const auto& o : outcomes(x, a))
            if (o.next == next) return o.prob;
        return 0.0;
    }

    [[nodiscard]] std::optional<Label> labeling(std::size_t x, std::size_t a, std::size_t next) const {
        for (const auto& o : outcomes(x, a))
            if (o.next == next) return o.label;
        return std::nullopt;
    }

    /// Labels that appear on at least one transition, in mask order.
    [[nodiscard]] std::vector<Label> label_range() const {
        std::set<Label> seen;
        for (const auto& row : outcomes_)
            for (const auto& o : row) seen.insert(o.label);
        return {seen.begin(), seen.end()};
    }

    void validate() const {
        for (std::size_t x = 0; x < states_.size(); ++x)
            if (available_actions(x).empty()) throw Error("state " + states_[x] + " has no available action");
    }

    [[nodiscard]] const AtomicPropositions& ap() const { return ap_; }
    [[nodiscard]] std::size_t state_count() const { return states_.size(); }
    [[nodiscard]] std::size_t action_count() const { return actions_.size(); }
    [[nodiscard]] std::size_t initial() const { return init_; }
    [[nodiscard]] const std::string& state_name(std::size_t x) const { return states_.at(x); }
    [[nodiscard]] const std::string& action_name(std::size_t a) const { return actions_.at(a); }
    [[nodiscard]] const std::vector<std::string>& action_names() const { return actions_; }
    [[nodiscard]] const RewardSource& reward_source() const { return reward_; }

    [[nodiscard]] const RewardMachine* truth() const {
        const auto* pb = std::get_if<PrmBacked>(&reward_);
        return pb ? &pb->machine : nullptr;
    }

private:
    void check(std::size_t x, std::size_t a) const {
        if (x >= states_.size()) throw Error("state index out of range");
        if (a >= actions_.size()) throw Error("action index out of range");
    }

    AtomicPropositions ap_;
    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::size_t init_;
    RewardSource reward_;
    std::vector<std::vector<Outcome>> outcomes_;
};

/// Per-episode hidden reward state: the machine state for PrmBacked sources,
/// the label history for TableBacked ones.
class RewardTracker {
public:
    explicit RewardTracker(const Nmdp& m) : m_(&m) {
        if (const auto* h = m.truth()) y_ = h->initial();
    }

    Reward advance(Label l, Rng& rng) {
        if (const auto* h = m_->truth()) {
            const Edge* e = h->edge(y_, l);
            Reward r = e->reward;
            y_ = sample_successor(*e, rng);
            return r;
        }
        history_.push_back(l);
        const auto& table = std::get<TableBacked>(m_->reward_source()).distributions;
        auto it = table.find(history_);
        if (it == table.end()) throw Error("no reward distribution for history '" + m_->ap().format(history_) + "'");
        std::vector<std::pair<Reward, double>> items(it->second.begin(), it->second.end());
        return items[sample_index(items, [](const auto& p) { return p.second; }, rng)].first;
    }

    [[nodiscard]] std::size_t machine_state() const { return y_; }

private:
    const Nmdp* m_;
    std::size_t y_ = 0;
    Word history_;
};

struct StepResult {
    std::size_t next;
    Label label;
    Reward reward;
};

/// Samples x' ~ p(x, a), labels the transition and draws the reward from the
/// hidden process conditioned on the whole label history.
inline StepResult step(const Nmdp& m, std::size_t x, std::size_t a, RewardTracker& tracker, Rng& rng) {
    const auto& outs = m.outcomes(x, a);
    if (outs.empty()) throw Error("action " + m.action_name(a) + " is unavailable in state " + m.state_name(x));
    const auto& o = outs[sample_index(outs, [](const Outcome& c) { return c.prob; }, rng)];
    Reward r = tracker.advance(o.label, rng);
    return {o.next, o.label, r};
}

struct Trajectory {
    std::vector<std::size_t> states;   // x₀ ⋯ xₙ
    std::vector<std::size_t> actions;  // a₁ ⋯ aₙ
    Word labels;                       // ℓ₁ ⋯ ℓₙ
    std::vector<Reward> rewards;       // r₁ ⋯ rₙ
};

/// Distribution over actions, indexed by action.
using ActionDistribution = std::vector<double>;

struct PositionalPolicy {
    std::vector<ActionDistribution> per_state;
};

struct HistoryPolicy {
    // (visited states x₀⋯x_k, actions a₁⋯a_k) ↦ distribution over actions at x_k
    std::function<ActionDistribution(std::span<const std::size_t>, std::span<const std::size_t>)> decide;
};

using Policy = std::variant<PositionalPolicy, HistoryPolicy>;

inline ActionDistribution policy_distribution(const Policy& pi, std::span<const std::size_t> states,
                                              std::span<const std::size_t> actions) {
    if (const auto* pos = std::get_if<PositionalPolicy>(&pi)) return pos->per_state.at(states.back());
    return std::get<HistoryPolicy>(pi).decide(states, actions);
}

/// Pure positional policy choosing `action[x]` in state x.
inline PositionalPolicy pure_policy(const Nmdp& m, const std::vector<std::size_t>& action) {
    PositionalPolicy pi;
    for (std::size_t x = 0; x < m.state_count(); ++x) {
        ActionDistribution d(m.action_count(), 0.0);
        d.at(action.at(x)) = 1.0;
        pi.per_state.push_back(std::move(d));
    }
    return pi;
}

inline PositionalPolicy uniform_policy(const Nmdp& m) {
    PositionalPolicy pi;
    for (std::size_t x = 0; x < m.state_count(); ++x) {
        ActionDistribution d(m.action_count(), 0.0);
        auto avail = m.available_actions(x);
        for (auto a : avail) d[a] = 1.0 / static_cast<double>(avail.size());
        pi.per_state.push_back(std::move(d));
    }
    return pi;
}

/// P_π(t) = ∏ π(history)(a_k) · p(x_{k-1}, a_k)(x_k).
inline double trajectory_probability(const Nmdp& m, const Policy& pi, const Trajectory& t) {
    if (t.states.empty() || t.states.size() != t.actions.size() + 1) throw Error("malformed trajectory");
    if (t.states.front() != m.initial()) throw Error("trajectory does not start in the initial state");
    double prob = 1.0;
    for (std::size_t k = 0; k < t.actions.size(); ++k) {
        auto x = t.states[k];
        auto a = t.actions[k];
        if (!m.available(x, a)) throw Error("action " + m.action_name(a) + " is unavailable in state " + m.state_name(x));
        auto dist = policy_distribution(pi, std::span(t.states).first(k + 1), std::span(t.actions).first(k));
        prob *= dist.at(a) * m.probability(x, a, t.states[k + 1]);
        if (prob == 0) return 0.0;
    }
    return prob;
}

/// H_ζ: pays 1 for each symbol of ζ matched in order; other labels self-loop
/// with reward 0. The final state absorbs with reward 0.
inline RewardMachine membership_reward_machine(const AtomicPropositions& ap, const Word& zeta) {
    if (zeta.empty()) throw Error("membership query word must be non-empty");
    RewardMachine h(ap, {0.0, 1.0});
    for (std::size_t k = 0; k <= zeta.size(); ++k) h.add_state("y" + std::to_string(k));
    h.set_initial(0);
    for (std::size_t k = 0; k <= zeta.size(); ++k)
        for (auto l : ap.all_labels()) {
            if (k < zeta.size() && l == zeta[k])
                h.set_transition(k, l, 1.0, {{k + 1, 1.0}});
            else
                h.set_transition(k, l, 0.0, {{k, 1.0}});
        }
    return h;
}

}  // namespace prm
