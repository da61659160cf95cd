#pragma once

#include "prm/nmdp.hpp"
#include "prm/semantics.hpp"

namespace prm {

/// Membership-query criterion: label match only, or label match plus a
/// positive probability that the last reward is positive.
enum class MqCriterion { LabelOnly, PositiveReward };

struct RealizabilityOptions {
    MqCriterion criterion = MqCriterion::LabelOnly;
    std::size_t node_budget = 1000;
};

namespace detail {

/// Support of the hidden machine state after a label sequence (PrmBacked only).
inline std::set<std::size_t> machine_support_step(const RewardMachine& h, const std::set<std::size_t>& from, Label l) {
    std::set<std::size_t> out;
    for (auto y : from)
        for (const auto& s : h.edge(y, l)->successors) out.insert(s.state);
    return out;
}

}  // namespace detail

/// Exhaustive depth-first search for a trajectory whose label word is exactly
/// w (every step contributes one symbol, ∅ included). Actions and successors
/// are tried in index order, so the witness is the lexicographically least.
inline std::optional<Trajectory> brute_force_word_realizability(const Nmdp& m, const Word& w, std::size_t max_len,
                                                                const RealizabilityOptions& opt = {}) {
    if (max_len < w.size()) throw Error("max_len must be at least the word length");
    const RewardMachine* truth = m.truth();
    if (opt.criterion == MqCriterion::PositiveReward && !truth)
        throw Error("the positive_reward criterion needs a machine-backed reward source");

    std::size_t expanded = 0;
    Trajectory t;
    t.states.push_back(m.initial());
    std::set<std::size_t> support;
    if (truth) support.insert(truth->initial());

    std::function<bool(std::size_t, const std::set<std::size_t>&)> dfs = [&](std::size_t k,
                                                                              const std::set<std::size_t>& sup) -> bool {
        if (++expanded > opt.node_budget)
            throw BudgetExceeded("realizability search exceeded its budget after expanding " +
                                 std::to_string(expanded - 1) + " nodes");
        if (k == w.size()) return true;
        const auto x = t.states.back();
        for (std::size_t a = 0; a < m.action_count(); ++a)
            for (const auto& o : m.outcomes(x, a)) {
                if (o.label != w[k]) continue;
                if (opt.criterion == MqCriterion::PositiveReward && k + 1 == w.size()) {
                    bool positive = false;
                    for (auto y : sup)
                        if (truth->edge(y, o.label)->reward > 0) positive = true;
                    if (!positive) continue;
                }
                t.states.push_back(o.next);
                t.actions.push_back(a);
                t.labels.push_back(o.label);
                auto next_sup = truth ? detail::machine_support_step(*truth, sup, o.label) : sup;
                if (dfs(k + 1, next_sup)) return true;
                t.states.pop_back();
                t.actions.pop_back();
                t.labels.pop_back();
            }
        return false;
    };
    if (!dfs(0, support)) return std::nullopt;
    return t;
}

/// Distribution of the reward for the last symbol of w, by direct propagation
/// of the hidden machine's state distribution (no matrices, no sampling).
inline RewardDistribution brute_force_reward_distribution(const RewardMachine& truth, const Word& w) {
    if (w.empty()) throw Error("word must be non-empty");
    std::map<std::size_t, double> dist{{truth.initial(), 1.0}};
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        std::map<std::size_t, double> next;
        for (auto [y, p] : dist) {
            const Edge* e = truth.edge(y, w[k]);
            if (!e) throw Error("undefined transition while driving the machine");
            for (const auto& s : e->successors) next[s.state] += p * s.prob;
        }
        dist = std::move(next);
    }
    RewardDistribution out;
    double mass = 0;
    for (auto [y, p] : dist) {
        const Edge* e = truth.edge(y, w.back());
        if (!e || p == 0) continue;
        out[e->reward] += p;
        mass += p;
    }
    if (!(mass > 0)) throw Error("unreachable word: " + truth.ap().format(w));
    for (auto& [r, p] : out) p /= mass;
    return out;
}

inline RewardDistribution brute_force_reward_distribution(const Nmdp& m, const Word& w) {
    const RewardMachine* truth = m.truth();
    if (!truth) throw Error("reward oracle needs a machine-backed reward source");
    if (!brute_force_word_realizability(m, w, w.size(), {MqCriterion::LabelOnly, std::numeric_limits<std::size_t>::max()}))
        throw Error("word '" + m.ap().format(w) + "' is not realizable");
    return brute_force_reward_distribution(*truth, w);
}

inline double total_variation(const RewardDistribution& a, const RewardDistribution& b) {
    double tv = 0;
    for (auto [r, p] : a) {
        auto it = b.find(r);
        tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
    }
    for (auto [r, p] : b)
        if (!a.contains(r)) tv += p;
    return tv / 2;
}

struct EncodingReport {
    double distance = 0.0;
    std::size_t words_checked = 0;
    std::size_t failure_words = 0;  // words whose reading reaches ⊥ in either machine
    Word worst;
};

/// max over words of length 1..max_len (over `alphabet`, default 2^AP) that
/// are reachable in `truth`, of the total-variation distance between the two
/// machines' next-reward distributions. Words that put mass on a failure
/// state count as distance 1.
inline EncodingReport encoding_distance(const RewardMachine& h, const RewardMachine& truth, std::size_t max_len,
                                        std::optional<std::vector<Label>> alphabet = std::nullopt) {
    if (!(h.ap() == truth.ap())) throw Error("machines disagree on atomic propositions");
    const auto sigma = alphabet ? *alphabet : truth.ap().all_labels();
    EncodingReport rep;
    auto bottom_mass = [](const RewardMachine& m, const Eigen::RowVectorXd& v) {
        auto f = m.failure_state();
        return f ? v(static_cast<Eigen::Index>(*f)) : 0.0;
    };

    Word w;
    std::function<void(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)> rec = [&](const Eigen::RowVectorXd& vh,
                                                                                     const Eigen::RowVectorXd& vt) {
        if (w.size() == max_len) return;
        for (auto l : sigma) {
            Eigen::RowVectorXd nt = vt * label_matrix(truth, l);
            if (!(nt.sum() > 0)) continue;
            Eigen::RowVectorXd nh = vh * label_matrix(h, l);
            ++rep.words_checked;
            double d = 0;
            if (bottom_mass(h, nh) > 0 || bottom_mass(truth, nt) > 0 || !(nh.sum() > 0)) {
                ++rep.failure_words;
                d = 1.0;
            } else {
                d = total_variation(next_reward_distribution(h, w, l), next_reward_distribution(truth, w, l));
            }
            if (d > rep.distance) {
                rep.distance = d;
                rep.worst = concat(w, l, {});
            }
            w.push_back(l);
            rec(nh, nt);
            w.pop_back();
        }
    };
    rec(initial_vector(h), initial_vector(truth));
    return rep;
}

}  // namespace prm
