#include "support.hpp"

using namespace prm;
using namespace prm::testing;

namespace {

void repeat(ObservationTable& t, const EpisodeTrace& trace, int n) {
    for (int i = 0; i < n; ++i) t.record(trace);
}

void expect_well_formed(const RewardMachine& h) {
    EXPECT_TRUE(h.is_total());
    for (std::size_t y = 0; y < h.state_count(); ++y)
        for (auto l : h.ap().all_labels()) {
            const Edge* e = h.edge(y, l);
            ASSERT_NE(e, nullptr);
            double sum = 0;
            for (const auto& s : e->successors) sum += s.prob;
            EXPECT_NEAR(sum, 1.0, 1e-9);
            EXPECT_TRUE(std::binary_search(h.gamma().begin(), h.gamma().end(), e->reward));
        }
}

}  // namespace

TEST(BuildHypothesis, SingleLabelSelfLoop) {
    AtomicPropositions ap;
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"", 0}}), 10);
    auto h = build_hypothesis(t, {5});
    // ⊥ is unreachable here and so is left out
    ASSERT_EQ(h.state_count(), 1U);
    EXPECT_FALSE(h.failure_state());
    EXPECT_EQ(*h.edge(0, Label{}), (Edge{0.0, {{0, 1.0}}}));
}

TEST(BuildHypothesis, UnobservedLabelsLeadToFailure) {
    AtomicPropositions ap({"a"});
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"", 0}}), 10);
    auto h = build_hypothesis(t, {5});
    ASSERT_EQ(h.state_count(), 2U);
    auto bottom = h.failure_state();
    ASSERT_TRUE(bottom);
    EXPECT_EQ(*h.edge(0, Label{}), (Edge{0.0, {{0, 1.0}}}));
    EXPECT_EQ(*h.edge(0, lbl(ap, "a")), (Edge{0.0, {{*bottom, 1.0}}}));
    for (auto l : ap.all_labels()) EXPECT_EQ(*h.edge(*bottom, l), (Edge{0.0, {{*bottom, 1.0}}}));
}

TEST(BuildHypothesis, StarvedRowsGoStraightToFailure) {
    auto ap = office_ap();
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"c", 0}, {"o", 1}}), 3);
    auto h = build_hypothesis(t, {1000});
    auto bottom = h.failure_state();
    ASSERT_TRUE(bottom);
    for (std::size_t y = 0; y < h.state_count(); ++y)
        for (auto l : ap.all_labels()) EXPECT_EQ(h.edge(y, l)->successors, (std::vector<Successor>{{*bottom, 1.0}}));
}

TEST(BuildHypothesis, RejectsOpenTables) {
    auto ap = office_ap();
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"c", 1}}), 100);
    repeat(t, trace_of(ap, {{"o", 0}}), 100);
    EXPECT_THROW((void)build_hypothesis(t, {1}), Error);
}

TEST(BuildHypothesis, StochasticRewardSplitsTheState) {
    auto ap = office_ap();
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"c", 0}, {"o", 1}}), 90);
    repeat(t, trace_of(ap, {{"c", 0}, {"o", 0}}), 10);
    t.add_sample_word(wrd(ap, "c"));
    t.add_sample_word(wrd(ap, "c;o"));
    ASSERT_TRUE(t.is_closed());
    ASSERT_TRUE(t.is_consistent());
    auto h = build_hypothesis(t, {1});
    expect_well_formed(h);
    auto d = next_reward_distribution(h, wrd(ap, "c"), lbl(ap, "o"));
    EXPECT_NEAR(d[1.0], 0.9, 1e-12);
    EXPECT_NEAR(d[0.0], 0.1, 1e-12);
    // the reward is a function of (state, label): after c there are two copies
    const Edge* pick = h.edge(h.initial(), lbl(ap, "c"));
    ASSERT_EQ(pick->successors.size(), 2U);
    EXPECT_EQ(pick->reward, 0.0);
}

TEST(BuildHypothesis, SourceConventionEmitsTheStateAnnotation) {
    auto ap = office_ap();
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"c", 1}, {"o", 0}}), 50);
    t.add_sample_word(wrd(ap, "c"));
    t.add_sample_word(wrd(ap, "c;o"));
    auto h = build_hypothesis(t, {1, RhoConvention::Source});
    auto c = lbl(ap, "c"), o = lbl(ap, "o");
    // the 1 observed on c is emitted one step later, when leaving (1, row(c))
    EXPECT_EQ(h.edge(h.initial(), c)->reward, 0.0);
    auto y1 = h.edge(h.initial(), c)->successors.at(0).state;
    EXPECT_EQ(h.edge(y1, o)->reward, 1.0);

    auto target = build_hypothesis(t, {1});
    EXPECT_EQ(target.edge(target.initial(), c)->reward, 1.0);
}

TEST(BuildHypothesis, ObservedRewardsFormGamma) {
    auto ap = office_ap();
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"c", 2.5}}), 5);
    t.add_sample_word(wrd(ap, "c"));
    auto h = build_hypothesis(t, {1});
    EXPECT_EQ(h.gamma(), (std::vector<Reward>{0.0, 2.5}));
}

TEST(BuildHypothesis, PoolingReadsFromTheBestSampledMember) {
    // ε and {a} are one class; only {a} has ever been followed by b
    AtomicPropositions ap({"a", "b"});
    ObservationTable t(ap);
    repeat(t, trace_of(ap, {{"a", 0}, {"b", 1}}), 40);
    repeat(t, trace_of(ap, {{"a", 0}, {"a", 0}}), 40);
    t.add_sample_word(wrd(ap, "a"));
    t.add_sample_word(wrd(ap, "a;b"));
    ASSERT_TRUE(t.compatible_rows(Word{}, wrd(ap, "a")));
    ASSERT_TRUE(t.is_closed());
    ASSERT_TRUE(t.is_consistent());
    auto pooled = build_hypothesis(t, {1});
    const Edge* e = pooled.edge(pooled.initial(), lbl(ap, "b"));
    EXPECT_EQ(e->reward, 1.0);
    EXPECT_NE(pooled.state_name(e->successors.at(0).state), kFailureStateName);

    HypothesisOptions plain{1};
    plain.pool_members = false;
    auto lone = build_hypothesis(t, plain);
    const Edge* f = lone.edge(lone.initial(), lbl(ap, "b"));
    EXPECT_EQ(lone.state_name(f->successors.at(0).state), kFailureStateName);
}

TEST(HypothesisProperties, CompletedRandomTablesGiveWellFormedMachines) {
    Rng rng(env_seed(23));
    for (int it = 0; it < 60; ++it) {
        auto truth = random_prm(rng, {3, 2, 2});
        auto m = random_nmdp(rng, truth, false, 3, 2);
        auto traces = collect_traces(m, uniform_policy(m), EpisodeSettings{4, {}}, 300, rng());
        ObservationTable t(truth.ap(), m.label_range(), it % 2 ? 20 : 0);
        for (const auto& tr : traces) t.record(tr);
        try {
            complete_table(t, 2000);
        } catch (const BudgetExceeded&) {
            continue;
        }
        ASSERT_TRUE(t.is_closed());
        ASSERT_TRUE(t.is_consistent());
        for (auto rho : {RhoConvention::Target, RhoConvention::Source}) {
            for (std::uint64_t n_check : {1U, 20U, 100000U}) {
                auto h = build_hypothesis(t, {n_check, rho});
                expect_well_formed(h);
                EXPECT_EQ(format_machine(parse_machine(format_machine(h))), format_machine(h));
            }
        }
    }
}
