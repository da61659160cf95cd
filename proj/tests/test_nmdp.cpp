#include "support.hpp"

using namespace prm;
using namespace prm::testing;

namespace {

Nmdp chain(const RewardMachine& truth) {
    // x0 -go-> x1 -go-> x2 (absorbing), labels a then ε
    Nmdp m(truth.ap(), {"x0", "x1", "x2"}, {"go", "wait"}, 0, PrmBacked{truth});
    auto a = truth.ap().parse_label("a");
    m.set_transition(0, 0, {{1, 1.0, a}});
    m.set_transition(1, 0, {{2, 1.0, Label{}}});
    m.set_transition(2, 0, {{2, 1.0, Label{}}});
    m.set_transition(2, 1, {{2, 1.0, Label{}}});
    return m;
}

}  // namespace

TEST(Nmdp, ValidatesConstruction) {
    AtomicPropositions ap({"a"});
    RewardMachine partial(ap, {0.0});
    partial.add_state("p");
    EXPECT_THROW(Nmdp(ap, {"x"}, {"go"}, 0, PrmBacked{partial}), Error);
    EXPECT_THROW(Nmdp(ap, {"x"}, {"go"}, 3, PrmBacked{constant_zero_machine(ap)}), Error);
    EXPECT_THROW(Nmdp(ap, {"x"}, {"go"}, 0, TableBacked{{{Word{}, {{0.0, 0.5}}}}}), Error);
    EXPECT_THROW(Nmdp(ap, {"x"}, {"go"}, 0, PrmBacked{constant_zero_machine(AtomicPropositions({"b"}))}), Error);

    Nmdp m(ap, {"x", "y"}, {"go"}, 0, PrmBacked{constant_zero_machine(ap)});
    EXPECT_THROW(m.set_transition(0, 0, {{1, 0.5, Label{}}}), Error);
    EXPECT_THROW(m.set_transition(0, 0, {{5, 1.0, Label{}}}), Error);
    EXPECT_THROW(m.set_transition(0, 0, {{1, 1.0, Label{2}}}), Error);
    EXPECT_THROW(m.validate(), Error);
}

TEST(TrajectoryProbability, DeterministicChainUnderPurePolicy) {
    AtomicPropositions ap({"a"});
    auto m = chain(constant_zero_machine(ap));
    auto pi = pure_policy(m, {0, 0, 1});
    Trajectory t{{0, 1, 2, 2}, {0, 0, 1}, {}, {}};
    EXPECT_EQ(trajectory_probability(m, pi, t), 1.0);
}

TEST(TrajectoryProbability, ZeroWhenPolicyNeverTakesTheAction) {
    AtomicPropositions ap({"a"});
    auto m = chain(constant_zero_machine(ap));
    auto pi = pure_policy(m, {0, 0, 0});
    Trajectory t{{0, 1, 2, 2}, {0, 0, 1}, {}, {}};
    EXPECT_EQ(trajectory_probability(m, pi, t), 0.0);
}

TEST(TrajectoryProbability, SplitTransitionUnderUniformPolicy) {
    AtomicPropositions ap({"a"});
    Nmdp m(ap, {"x0", "x1"}, {"l", "r"}, 0, PrmBacked{constant_zero_machine(ap)});
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t a = 0; a < 2; ++a) m.set_transition(x, a, {{0, 0.5, Label{}}, {1, 0.5, Label{}}});
    Trajectory t{{0, 1}, {1}, {}, {}};
    EXPECT_EQ(trajectory_probability(m, uniform_policy(m), t), 0.25);
}

TEST(TrajectoryProbability, UnavailableActionIsAnError) {
    AtomicPropositions ap({"a"});
    auto m = chain(constant_zero_machine(ap));
    Trajectory t{{0, 0}, {1}, {}, {}};
    EXPECT_THROW((void)trajectory_probability(m, uniform_policy(m), t), Error);
}

TEST(TrajectoryProbability, HistoryPolicySeesTheHistory) {
    AtomicPropositions ap({"a"});
    auto m = chain(constant_zero_machine(ap));
    HistoryPolicy pi{[](std::span<const std::size_t> xs, std::span<const std::size_t>) {
        return xs.size() >= 3 ? ActionDistribution{0.25, 0.75} : ActionDistribution{1.0, 0.0};
    }};
    Trajectory t{{0, 1, 2, 2}, {0, 0, 1}, {}, {}};
    EXPECT_EQ(trajectory_probability(m, pi, t), 0.75);
}

TEST(Step, ConstantZeroMachineAlwaysPaysZero) {
    AtomicPropositions ap({"a"});
    auto m = chain(constant_zero_machine(ap));
    Rng rng(1);
    RewardTracker tr(m);
    auto s = step(m, 0, 0, tr, rng);
    EXPECT_EQ(s.next, 1U);
    EXPECT_EQ(s.label, lbl(ap, "a"));
    EXPECT_EQ(s.reward, 0.0);
    EXPECT_THROW((void)step(m, 0, 1, tr, rng), Error);
}

TEST(Step, OfficeDeliveryPaysOneNinetyPercent) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    auto pi = shortest_path_policy(env.world);
    Rng rng(77);
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        RewardTracker tr(m);
        auto x = m.initial();
        StepResult s{};
        for (int k = 0; k < 2; ++k) {
            auto a = sample_action(pi.per_state[x], rng);
            s = step(m, x, a, tr, rng);
            x = s.next;
        }
        ASSERT_EQ(s.label, lbl(m.ap(), "o"));
        ones += s.reward == 1.0;
    }
    EXPECT_NEAR(ones / double(n), 0.9, 0.01);
}

TEST(Step, TableBackedSourceUsesTheWholeHistory) {
    AtomicPropositions ap({"a"});
    auto a = lbl(ap, "a");
    TableBacked table{{{Word{a}, {{0.0, 1.0}}}, {Word{a, a}, {{5.0, 1.0}}}}};
    Nmdp m(ap, {"x"}, {"go"}, 0, table);
    m.set_transition(0, 0, {{0, 1.0, a}});
    Rng rng(0);
    RewardTracker tr(m);
    EXPECT_EQ(step(m, 0, 0, tr, rng).reward, 0.0);
    EXPECT_EQ(step(m, 0, 0, tr, rng).reward, 5.0);
    EXPECT_THROW((void)step(m, 0, 0, tr, rng), Error);
}

TEST(MembershipMachine, CoffeeThenOffice) {
    auto ap = office_ap();
    auto h = membership_reward_machine(ap, wrd(ap, "c;o"));
    auto c = lbl(ap, "c"), o = lbl(ap, "o");
    EXPECT_EQ(h.state_count(), 3U);
    EXPECT_EQ(h.gamma(), (std::vector<Reward>{0.0, 1.0}));
    EXPECT_EQ(*h.edge(0, c), (Edge{1.0, {{1, 1.0}}}));
    EXPECT_EQ(*h.edge(0, o), (Edge{0.0, {{0, 1.0}}}));
    EXPECT_EQ(*h.edge(1, o), (Edge{1.0, {{2, 1.0}}}));
    for (auto l : ap.all_labels()) EXPECT_EQ(*h.edge(2, l), (Edge{0.0, {{2, 1.0}}}));
    EXPECT_THROW((void)membership_reward_machine(ap, {}), Error);
}

TEST(MembershipMachine, SingleSymbolPaysAtMostOnce) {
    auto ap = office_ap();
    auto h = membership_reward_machine(ap, wrd(ap, "c"));
    EXPECT_EQ(h.state_count(), 2U);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        double total = 0;
        for (const auto& s : sample_run(h, random_word(ap, 12, rng), rng)) total += s.reward;
        EXPECT_LE(total, 1.0);
    }
}

TEST(MembershipMachine, FeedingZetaPaysOnEverySymbol) {
    AtomicPropositions ap({"a", "b"});
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        auto zeta = random_word(ap, 1 + i % 6, rng);
        auto h = membership_reward_machine(ap, zeta);
        double total = 0;
        for (const auto& s : sample_run(h, zeta, rng)) {
            EXPECT_EQ(s.reward, 1.0);
            total += s.reward;
        }
        EXPECT_EQ(total, static_cast<double>(zeta.size()));
    }
}

TEST(MembershipMachine, TotalRewardIsLongestMatchedPrefix) {
    // independent greedy matcher: the machine matches ζ as a subsequence, left to right
    AtomicPropositions ap({"a", "b"});
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
        auto zeta = random_word(ap, 1 + i % 4, rng);
        auto h = membership_reward_machine(ap, zeta);
        auto w = random_word(ap, 10, rng);
        auto run = sample_run(h, w, rng);
        std::size_t matched = 0;
        double total = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (matched < zeta.size() && w[k] == zeta[matched]) ++matched;
            total += run[k].reward;
            EXPECT_EQ(total, static_cast<double>(matched));  // prefix-monotone
        }
    }
}
