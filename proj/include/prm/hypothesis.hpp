#pragma once

#include "prm/table.hpp"

#include <deque>
#include <tuple>

namespace prm {

/// Which reward a hypothesis state (γ, row(u)) emits on label ℓ.
///  - Source: γ, the annotation of the state being left (the literal rule;
///    rewards come out one step late).
///  - Target: γ', the reward observed when reading ℓ after u. States are
///    split by the reward they will emit on each stochastic label, so the
///    machine stays a PRM (reward is a function of state and label).
enum class RhoConvention { Source, Target };

struct HypothesisOptions {
    std::uint64_t n_check = 1;
    RhoConvention rho = RhoConvention::Target;
    std::size_t max_copies = 4096;  // per (γ, u) under the target convention
    // Read the ℓ-transition of a class from whichever member has the most
    // observations of ℓ, rather than from the representative alone.
    bool pool_members = true;
};

namespace detail {

struct LabelOutcome {
    Label label;
    bool to_failure = true;
    std::vector<std::pair<Reward, double>> rewards;  // γ' ↦ T(uℓ)(γ') / Σ_g T(uℓ)(g)
    Word successor;                                  // representative u'
};

struct RowBehaviour {
    bool starved = false;  // Sample(u) < N_check
    std::vector<LabelOutcome> labels;
    std::vector<std::size_t> split;  // indices into `labels` with more than one reward
    std::size_t copies = 1;

    /// Committed reward per label for copy k (mixed radix over `split`).
    [[nodiscard]] std::vector<std::size_t> choices(std::size_t k) const {
        std::vector<std::size_t> out(labels.size(), 0);
        for (auto idx : split) {
            auto radix = labels[idx].rewards.size();
            out[idx] = k % radix;
            k /= radix;
        }
        return out;
    }

    [[nodiscard]] double copy_probability(std::size_t k) const {
        double p = 1.0;
        auto ch = choices(k);
        for (auto idx : split) p *= labels[idx].rewards[ch[idx]].second;
        return p;
    }
};

inline std::string hypothesis_state_name(const AtomicPropositions& ap, Reward g, const Word& u, std::size_t copy,
                                         std::size_t copies) {
    std::string name = format_number(g) + "@[" + ap.format(u) + "]";
    if (copies > 1) name += "#" + std::to_string(copy);
    return name;
}

}  // namespace detail

/// Builds the hypothesis PRM of a closed and consistent table.
///
/// States are (γ, row(u)) for representatives u reachable from (0, row(ε)),
/// plus the absorbing failure state ⊥ when it is reachable. Rows sampled
/// fewer than N_check times, labels never observed after u (or after any S
/// word u represents, with pooling), and successors with no compatible row
/// all lead to ⊥.
inline RewardMachine build_hypothesis(const ObservationTable& table, const HypothesisOptions& opt) {
    if (auto w = table.closedness_witness())
        throw Error("observation table is not closed (witness '" + table.ap().format(*w) + "')");
    if (table.consistency_witness()) throw Error("observation table is not consistent");

    const auto& ap = table.ap();
    const auto labels = ap.all_labels();
    std::map<Word, Word> rep_cache;
    auto rep = [&](const Word& s) -> const Word& {
        auto it = rep_cache.find(s);
        if (it == rep_cache.end()) it = rep_cache.emplace(s, table.representative(s)).first;
        return it->second;
    };

    std::map<Word, std::vector<Word>> members;  // representative ↦ S words it stands for
    if (opt.pool_members)
        for (const auto& s : table.samples()) members[rep(s)].push_back(s);
    auto source_of = [&](const Word& u, Label l) -> std::pair<Word, const ObservationTable::Node*> {
        std::pair<Word, const ObservationTable::Node*> best{u, table.find(u, l, {})};
        auto it = members.find(u);
        if (it == members.end()) return best;
        for (const auto& s : it->second) {
            const auto* node = table.find(s, l, {});
            if (node && (!best.second || node->total > best.second->total)) best = {s, node};
        }
        return best;
    };

    std::map<Word, detail::RowBehaviour> behaviour;
    auto behaviour_of = [&](const Word& u) -> const detail::RowBehaviour& {
        auto it = behaviour.find(u);
        if (it != behaviour.end()) return it->second;
        detail::RowBehaviour b;
        b.starved = table.sample(u) < opt.n_check;
        if (!b.starved) {
            for (auto l : labels) {
                detail::LabelOutcome lo{l, true, {}, {}};
                auto [source, node] = source_of(u, l);
                if (node && node->total > 0) {
                    if (auto best = table.best_compatible(concat(source, l, {}))) {
                        lo.to_failure = false;
                        lo.successor = rep(*best);
                        for (auto [r, c] : node->freq)
                            if (c > 0) lo.rewards.emplace_back(r, static_cast<double>(c) / static_cast<double>(node->total));
                    }
                }
                if (!lo.to_failure && lo.rewards.size() > 1 && opt.rho == RhoConvention::Target) {
                    b.split.push_back(b.labels.size());
                    b.copies *= lo.rewards.size();
                    if (b.copies > opt.max_copies)
                        throw Error("hypothesis state for '" + ap.format(u) + "' needs more than " +
                                    std::to_string(opt.max_copies) + " copies");
                }
                b.labels.push_back(std::move(lo));
            }
        }
        return behaviour.emplace(u, std::move(b)).first->second;
    };

    using Key = std::tuple<Reward, Word, std::size_t>;  // (γ, u, copy)
    std::map<Key, std::size_t> index;
    std::vector<Key> keys;
    std::deque<std::size_t> queue;
    auto intern = [&](const Key& k) {
        auto [it, fresh] = index.try_emplace(k, keys.size());
        if (fresh) {
            keys.push_back(k);
            queue.push_back(it->second);
        }
        return it->second;
    };

    const Word& u0 = rep(Word{});
    std::size_t init_copy = 0;
    {
        const auto& b = behaviour_of(u0);
        double best = -1;
        for (std::size_t k = 0; k < b.copies; ++k)
            if (b.copy_probability(k) > best) {
                best = b.copy_probability(k);
                init_copy = k;
            }
    }
    intern({0.0, u0, init_copy});

    struct PendingEdge {
        std::size_t from;
        Label label;
        Reward reward;
        std::vector<std::pair<std::size_t, double>> to;  // state id (npos = ⊥)
    };
    constexpr auto kFailure = static_cast<std::size_t>(-1);
    std::vector<PendingEdge> edges;
    bool failure_used = false;

    while (!queue.empty()) {
        auto id = queue.front();
        queue.pop_front();
        auto [gamma, u, copy] = keys[id];
        const auto& b = behaviour_of(u);
        auto choice = b.choices(copy);
        for (std::size_t li = 0; li < labels.size(); ++li) {
            const Reward fail_reward = opt.rho == RhoConvention::Source ? gamma : 0.0;
            if (b.starved || b.labels[li].to_failure) {
                edges.push_back({id, labels[li], fail_reward, {{kFailure, 1.0}}});
                failure_used = true;
                continue;
            }
            const auto& lo = b.labels[li];
            const auto& next_b = behaviour_of(lo.successor);
            PendingEdge e{id, labels[li], 0.0, {}};
            auto add_targets = [&](Reward g_next, double weight) {
                for (std::size_t k = 0; k < next_b.copies; ++k)
                    e.to.emplace_back(intern({g_next, lo.successor, k}), weight * next_b.copy_probability(k));
            };
            if (opt.rho == RhoConvention::Source) {
                e.reward = gamma;
                for (auto [g, p] : lo.rewards) add_targets(g, p);
            } else {
                auto [g, p] = lo.rewards.size() == 1 ? lo.rewards.front() : lo.rewards[choice[li]];
                e.reward = g;
                add_targets(g, 1.0);
            }
            edges.push_back(std::move(e));
        }
    }

    auto gamma = table.observed_rewards();
    RewardMachine h(ap, gamma);
    for (const auto& [g, u, k] : keys) h.add_state(detail::hypothesis_state_name(ap, g, u, k, behaviour_of(u).copies));
    std::size_t failure = 0;
    if (failure_used) {
        failure = h.add_state(std::string(kFailureStateName));
        for (auto l : labels) h.set_transition(failure, l, 0.0, {{failure, 1.0}});
    }
    h.set_initial(0);
    for (auto& e : edges) {
        std::vector<Successor> succ;
        for (auto [to, p] : e.to) succ.push_back({to == kFailure ? failure : to, p});
        // renormalise the product of copy probabilities against rounding drift
        double total = 0;
        for (const auto& s : succ) total += s.prob;
        for (auto& s : succ) s.prob /= total;
        h.set_transition(e.from, e.label, e.reward, std::move(succ));
    }
    return h;
}

}  // namespace prm
