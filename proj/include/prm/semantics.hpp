#pragma once

#include "prm/machine.hpp"

#include <Eigen/Dense>

#include <span>

namespace prm {

using Matrix = Eigen::MatrixXd;

/// Upper bound on |2^AP| for operations that sum over every label.
inline constexpr std::size_t kDefaultLabelCap = std::size_t{1} << 16;

/// H(ℓ)[i,j] = τ(y_i, ℓ)(y_j). Undefined (y_i, ℓ) give zero rows.
inline Matrix label_matrix(const RewardMachine& h, Label l) {
    const auto n = static_cast<Eigen::Index>(h.state_count());
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < h.state_count(); ++i)
        if (const Edge* e = h.edge(i, l))
            for (const auto& s : e->successors) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s.state)) = s.prob;
    return m;
}

/// H(γ | ℓ): rows of H(ℓ) whose emitted reward is γ, zero elsewhere.
inline Matrix reward_conditional_matrix(const RewardMachine& h, Reward gamma, Label l) {
    if (!h.in_gamma(gamma)) throw Error("reward " + format_number(gamma) + " is not in the reward set");
    const auto n = static_cast<Eigen::Index>(h.state_count());
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < h.state_count(); ++i) {
        const Edge* e = h.edge(i, l);
        if (!e || e->reward != gamma) continue;
        for (const auto& s : e->successors) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s.state)) = s.prob;
    }
    return m;
}

inline void check_label_cap(const RewardMachine& h, std::size_t cap) {
    if (h.ap().label_count() > cap)
        throw Error("2^|AP| = " + std::to_string(h.ap().label_count()) + " exceeds the label enumeration cap " +
                    std::to_string(cap));
}

/// H(γ) = Σ_ℓ H(γ | ℓ).
inline Matrix reward_matrix(const RewardMachine& h, Reward gamma, std::size_t cap = kDefaultLabelCap) {
    check_label_cap(h, cap);
    if (!h.in_gamma(gamma)) throw Error("reward " + format_number(gamma) + " is not in the reward set");
    const auto n = static_cast<Eigen::Index>(h.state_count());
    Matrix m = Matrix::Zero(n, n);
    for (auto l : h.ap().all_labels()) m += reward_conditional_matrix(h, gamma, l);
    return m;
}

inline Eigen::RowVectorXd initial_vector(const RewardMachine& h) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(h.state_count()));
    v(static_cast<Eigen::Index>(h.initial())) = 1.0;
    return v;
}

/// y_I · H(ℓ₁)⋯H(ℓ_k), the state distribution after driving the machine with w.
inline Eigen::RowVectorXd state_distribution(const RewardMachine& h, const Word& w) {
    Eigen::RowVectorXd v = initial_vector(h);
    for (auto l : w) v = v * label_matrix(h, l);
    return v;
}

/// P_H(γ₁⋯γ_n) = y_I · H(γ₁)⋯H(γ_n) · 1. This is the literal product of the
/// label-summed matrices, so it is not normalised over Γⁿ.
inline double reward_sequence_probability(const RewardMachine& h, std::span<const Reward> rewards,
                                          std::size_t cap = kDefaultLabelCap) {
    Eigen::RowVectorXd v = initial_vector(h);
    for (Reward g : rewards) v = v * reward_matrix(h, g, cap);
    return v.sum();
}

/// P_H(γ | ℓ₁⋯ℓ_k) = y_I · H(ℓ₁⋯ℓ_k) H(γ) · 1, evaluated literally.
inline double conditional_reward_probability(const RewardMachine& h, Reward gamma, const Word& w,
                                             std::size_t cap = kDefaultLabelCap) {
    return (state_distribution(h, w) * reward_matrix(h, gamma, cap)).sum();
}

/// Label-conditioned next-reward distribution:
/// γ ↦ y_I H(prefix) H(γ | next) 1 / y_I H(prefix) H(next) 1.
/// Rewards with zero probability are omitted.
inline RewardDistribution next_reward_distribution(const RewardMachine& h, const Word& prefix, Label next) {
    Eigen::RowVectorXd v = state_distribution(h, prefix);
    const double denom = (v * label_matrix(h, next)).sum();
    if (!(denom > 0)) throw Error("unreachable word: " + h.ap().format(concat(prefix, next, {})));
    RewardDistribution out;
    for (Reward g : h.gamma()) {
        double p = (v * reward_conditional_matrix(h, g, next)).sum() / denom;
        if (p > 0) out[g] = p;
    }
    return out;
}

struct RunStep {
    std::size_t state;  // state after reading the label
    Reward reward;

    friend bool operator==(const RunStep&, const RunStep&) = default;
};

/// Samples a run of the machine on w: emits ϱ(y, ℓ) then draws y' ~ τ(y, ℓ).
inline std::vector<RunStep> sample_run(const RewardMachine& h, const Word& w, Rng& rng) {
    std::vector<RunStep> run;
    run.reserve(w.size());
    std::size_t y = h.initial();
    for (auto l : w) {
        const Edge* e = h.edge(y, l);
        if (!e) throw Error("undefined transition at (" + h.state_name(y) + ", " + h.ap().format(l) + ")");
        Reward r = e->reward;
        y = sample_successor(*e, rng);
        run.push_back({y, r});
    }
    return run;
}

}  // namespace prm
