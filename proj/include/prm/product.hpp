#pragma once

#include "prm/nmdp.hpp"

namespace prm {

struct ProductOutcome {
    std::size_t next = 0;  // index of (x', y')
    double prob = 0.0;
    Label label;
    Reward reward = 0.0;
};

/// Synchronous composition M × H. State (x, y) has index x·|Y| + y. The
/// reward of a transition is ϱ(y, L(x, a, x')), so it is Markovian.
class ProductMdp {
public:
    ProductMdp(std::size_t env_states, std::size_t machine_states, std::size_t actions, std::size_t init)
        : nx_(env_states), ny_(machine_states), na_(actions), init_(init), rows_(nx_ * ny_ * na_) {}

    [[nodiscard]] std::size_t index(std::size_t x, std::size_t y) const { return x * ny_ + y; }
    [[nodiscard]] std::pair<std::size_t, std::size_t> split(std::size_t s) const { return {s / ny_, s % ny_}; }

    [[nodiscard]] const std::vector<ProductOutcome>& outcomes(std::size_t s, std::size_t a) const {
        return rows_.at(s * na_ + a);
    }
    std::vector<ProductOutcome>& outcomes(std::size_t s, std::size_t a) { return rows_.at(s * na_ + a); }

    [[nodiscard]] double probability(std::size_t s, std::size_t a, std::size_t next) const {
        for (const auto& o : outcomes(s, a))
            if (o.next == next) return o.prob;
        return 0.0;
    }

    [[nodiscard]] std::size_t state_count() const { return nx_ * ny_; }
    [[nodiscard]] std::size_t env_state_count() const { return nx_; }
    [[nodiscard]] std::size_t machine_state_count() const { return ny_; }
    [[nodiscard]] std::size_t action_count() const { return na_; }
    [[nodiscard]] std::size_t initial() const { return init_; }

private:
    std::size_t nx_, ny_, na_, init_;
    std::vector<std::vector<ProductOutcome>> rows_;
};

/// p'((x,y), a, (x',y')) = p(x, a, x') · τ(y, L(x,a,x'), y').
inline ProductMdp product(const Nmdp& m, const RewardMachine& h) {
    if (!(m.ap() == h.ap())) throw Error("NMDP and machine disagree on atomic propositions");
    std::set<std::pair<std::size_t, Label>> missing;
    for (std::size_t x = 0; x < m.state_count(); ++x)
        for (std::size_t a = 0; a < m.action_count(); ++a)
            for (const auto& o : m.outcomes(x, a))
                for (std::size_t y = 0; y < h.state_count(); ++y)
                    if (!h.edge(y, o.label)) missing.emplace(y, o.label);
    if (!missing.empty()) {
        std::string msg = "machine is undefined on";
        for (const auto& [y, l] : missing) msg += " (" + h.state_name(y) + ", " + h.ap().format(l) + ")";
        throw Error(msg);
    }

    ProductMdp out(m.state_count(), h.state_count(), m.action_count(), m.initial() * h.state_count() + h.initial());
    for (std::size_t x = 0; x < m.state_count(); ++x)
        for (std::size_t y = 0; y < h.state_count(); ++y)
            for (std::size_t a = 0; a < m.action_count(); ++a) {
                auto& row = out.outcomes(out.index(x, y), a);
                for (const auto& o : m.outcomes(x, a)) {
                    const Edge* e = h.edge(y, o.label);
                    for (const auto& s : e->successors)
                        row.push_back({out.index(o.next, s.state), o.prob * s.prob, o.label, e->reward});
                }
                std::sort(row.begin(), row.end(), [](const auto& l, const auto& r) { return l.next < r.next; });
            }
    return out;
}

}  // namespace prm
