#pragma once

#include "prm/label.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace prm {

using Rng = std::mt19937_64;

inline constexpr double kProbabilityTolerance = 1e-9;

/// Name given to the absorbing failure state of learned hypotheses.
inline constexpr std::string_view kFailureStateName = "⊥";

struct Successor {
    std::size_t state = 0;
    double prob = 0.0;

    friend bool operator==(const Successor&, const Successor&) = default;
};

/// Outgoing behaviour of one (state, label) pair: the emitted reward and the
/// distribution over successor states (sorted by state, strictly positive).
struct Edge {
    Reward reward = 0.0;
    std::vector<Successor> successors;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Draws an index into `probs` (assumed to sum to ~1); the last positive entry
/// absorbs any rounding slack.
template <typename Range, typename Proj>
std::size_t sample_index(const Range& items, Proj proj, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    std::size_t last = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        double p = proj(items[i]);
        if (p <= 0) continue;
        last = i;
        if (u < p) return i;
        u -= p;
    }
    return last;
}

inline std::size_t sample_successor(const Edge& e, Rng& rng) {
    return e.successors[sample_index(e.successors, [](const Successor& s) { return s.prob; }, rng)].state;
}

/// Probabilistic reward machine (AP, Γ, Y, y_I, τ, ϱ). The machine may be
/// partial: (state, label) pairs without an edge are undefined.
class RewardMachine {
public:
    RewardMachine() = default;

    RewardMachine(AtomicPropositions ap, std::vector<Reward> gamma) : ap_(std::move(ap)) {
        std::sort(gamma.begin(), gamma.end());
        gamma.erase(std::unique(gamma.begin(), gamma.end()), gamma.end());
        if (!std::binary_search(gamma.begin(), gamma.end(), 0.0)) throw Error("reward set must contain 0");
        for (double g : gamma)
            if (!std::isfinite(g)) throw Error("rewards must be finite");
        gamma_ = std::move(gamma);
    }

    std::size_t add_state(std::string name) {
        if (name.empty() || name.find_first_of(" \t,") != std::string::npos)
            throw Error("invalid state name '" + name + "'");
        if (find_state(name)) throw Error("duplicate state name '" + name + "'");
        names_.push_back(std::move(name));
        edges_.emplace_back();
        return names_.size() - 1;
    }

    void set_initial(std::size_t y) {
        check_state(y);
        init_ = y;
    }

    void set_transition(std::size_t y, Label l, Reward r, std::vector<Successor> succ) {
        check_state(y);
        if (!ap_.valid(l)) throw Error("label outside the alphabet");
        if (!in_gamma(r)) throw Error("reward " + format_number(r) + " is not in the reward set");
        std::sort(succ.begin(), succ.end(), [](const auto& a, const auto& b) { return a.state < b.state; });
        std::vector<Successor> merged;
        double total = 0;
        for (const auto& s : succ) {
            check_state(s.state);
            if (!(s.prob >= 0) || !std::isfinite(s.prob)) throw Error("transition probabilities must be non-negative");
            total += s.prob;
            if (s.prob == 0) continue;
            if (!merged.empty() && merged.back().state == s.state)
                merged.back().prob += s.prob;
            else
                merged.push_back(s);
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance)
            throw Error("transition from " + names_[y] + " on " + ap_.format(l) + " sums to " + format_number(total));
        edges_[y][l.mask] = Edge{r, std::move(merged)};
    }

    void clear_transition(std::size_t y, Label l) {
        check_state(y);
        edges_[y].erase(l.mask);
    }

    [[nodiscard]] const Edge* edge(std::size_t y, Label l) const {
        auto it = edges_[y].find(l.mask);
        return it == edges_[y].end() ? nullptr : &it->second;
    }

    /// Edges leaving `y`, keyed by label mask.
    [[nodiscard]] const std::map<std::uint32_t, Edge>& edges(std::size_t y) const { return edges_[y]; }

    [[nodiscard]] bool is_total() const { return missing_pairs().empty(); }

    [[nodiscard]] std::vector<std::pair<std::size_t, Label>> missing_pairs() const {
        std::vector<std::pair<std::size_t, Label>> out;
        for (std::size_t y = 0; y < names_.size(); ++y)
            for (std::uint32_t m = 0; m < ap_.label_count(); ++m)
                if (!edges_[y].contains(m)) out.emplace_back(y, Label{m});
        return out;
    }

    [[nodiscard]] bool in_gamma(Reward r) const { return std::binary_search(gamma_.begin(), gamma_.end(), r); }

    [[nodiscard]] const AtomicPropositions& ap() const { return ap_; }
    [[nodiscard]] const std::vector<Reward>& gamma() const { return gamma_; }
    [[nodiscard]] std::size_t state_count() const { return names_.size(); }
    [[nodiscard]] std::size_t initial() const { return init_; }
    [[nodiscard]] const std::string& state_name(std::size_t y) const { return names_.at(y); }
    [[nodiscard]] const std::vector<std::string>& state_names() const { return names_; }

    [[nodiscard]] std::optional<std::size_t> find_state(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::optional<std::size_t> failure_state() const { return find_state(kFailureStateName); }

    friend bool operator==(const RewardMachine&, const RewardMachine&) = default;

private:
    void check_state(std::size_t y) const {
        if (y >= names_.size()) throw Error("state index " + std::to_string(y) + " out of range");
    }

    AtomicPropositions ap_;
    std::vector<Reward> gamma_{0.0};
    std::vector<std::string> names_;
    std::size_t init_ = 0;
    std::vector<std::map<std::uint32_t, Edge>> edges_;
};

/// Deterministic machine with one state that emits 0 on every label.
inline RewardMachine constant_zero_machine(const AtomicPropositions& ap) {
    RewardMachine h(ap, {0.0});
    auto y = h.add_state("y0");
    for (auto l : ap.all_labels()) h.set_transition(y, l, 0.0, {{y, 1.0}});
    return h;
}

}  // namespace prm
