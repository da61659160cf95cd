#include "support.hpp"

using namespace prm;
using namespace prm::testing;

TEST(LearnPassive, SingleEpisode) {
    auto ap = office_ap();
    auto res = learn_passive(ap, {trace_of(ap, {{"c", 0}, {"o", 1}})});
    const auto& e = res.table.experiments();
    for (auto w : {"", "o", "c;o"}) EXPECT_TRUE(e.contains(wrd(ap, w))) << w;
    EXPECT_EQ(res.table.freq(wrd(ap, "c")), (FreqMap{{0.0, 1}}));
    EXPECT_EQ(res.table.freq(wrd(ap, "c;o")), (FreqMap{{1.0, 1}}));
    EXPECT_EQ(res.traces, 1U);
    EXPECT_TRUE(res.table.is_closed());
    EXPECT_TRUE(res.table.is_consistent());
}

TEST(LearnPassive, NeverMovingPolicyGivesAnEmptyLabelChain) {
    auto w = build_office_nmdp(load_gridmap("A\n"), coffee_machine());
    auto res = learn_passive(w.nmdp, uniform_policy(w.nmdp), 50, EpisodeSettings{10, {}}, 1);
    const auto& h = res.hypothesis;
    // one live state per observed prefix length, since episodes stop after 10 steps
    ASSERT_EQ(h.state_count(), 12U);
    auto bottom = h.failure_state();
    ASSERT_TRUE(bottom);
    auto y = h.initial();
    for (int k = 0; k <= 10; ++k) {
        ASSERT_NE(y, *bottom) << k;
        for (auto l : h.ap().all_labels())
            if (l != Label{}) EXPECT_EQ(h.edge(y, l)->successors, (std::vector<Successor>{{*bottom, 1.0}}));
        const Edge* e = h.edge(y, Label{});
        EXPECT_EQ(e->reward, 0.0);
        ASSERT_EQ(e->successors.size(), 1U);
        y = e->successors[0].state;
    }
    EXPECT_EQ(y, *bottom);
}

TEST(LearnPassive, OfficeDeliverySplit) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    auto res = learn_passive(m, shortest_path_policy(env.world), 10000, env.episode, 7);
    auto d = next_reward_distribution(res.hypothesis, wrd(m.ap(), "c"), lbl(m.ap(), "o"));
    EXPECT_NEAR(d[1.0], 0.9, 0.02);
    EXPECT_NEAR(d[0.0] + d[1.0], 1.0, 1e-12);
}

TEST(LearnPassive, UnobservedLabelsOnlyReachFailure) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    auto res = learn_passive(m, shortest_path_policy(env.world), 500, env.episode, 3);
    const auto& h = res.hypothesis;
    auto bottom = h.failure_state();
    ASSERT_TRUE(bottom);
    std::set<Label> seen;
    res.table.for_each_word([&](const Word& w, const ObservationTable::Node&) {
        for (auto l : w) seen.insert(l);
    });
    EXPECT_EQ(seen, (std::set<Label>{lbl(m.ap(), "c"), lbl(m.ap(), "o")}));
    for (std::size_t y = 0; y < h.state_count(); ++y)
        for (auto l : h.ap().all_labels())
            if (!seen.contains(l)) EXPECT_EQ(h.edge(y, l)->successors, (std::vector<Successor>{{*bottom, 1.0}}));
    // in particular nothing leaves a live state on a decoration label
    for (std::size_t y = 0; y < h.state_count(); ++y)
        for (auto l : h.ap().all_labels())
            if (l.contains(h.ap().index_of("*"))) EXPECT_EQ(h.edge(y, l)->successors.at(0).state, *bottom);
}

TEST(LearnPassive, TraceOrderDoesNotMatter) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    auto traces = collect_traces(m, uniform_policy(m), EpisodeSettings{6, {}}, 300, env_seed(8));
    auto a = learn_passive(m.ap(), traces);
    Rng rng(env_seed(9));
    std::shuffle(traces.begin(), traces.end(), rng);
    auto b = learn_passive(m.ap(), traces);
    EXPECT_EQ(format_table_csv(a.table), format_table_csv(b.table));
    EXPECT_EQ(a.table.samples(), b.table.samples());
    EXPECT_EQ(a.table.experiments(), b.table.experiments());
    EXPECT_EQ(format_machine(a.hypothesis), format_machine(b.hypothesis));
}

TEST(LearnPassive, LongSuffixesAreDropped) {
    AtomicPropositions ap({"a"});
    EpisodeTrace t;
    for (int i = 0; i < 15; ++i) t.push_back({lbl(ap, "a"), 0.0});
    PassiveConfig cfg;
    cfg.max_experiment_len = 12;
    auto res = learn_passive(ap, {t}, cfg);
    EXPECT_EQ(res.dropped_suffixes, 3U);
    for (const auto& e : res.table.experiments()) EXPECT_LE(e.size(), 12U);
    EXPECT_NE(format_passive_report(res).find("dropped_suffixes: 3"), std::string::npos);
}

TEST(LearnPassive, TraceLogMatchesLiveRollout) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    auto pi = shortest_path_policy(env.world);
    auto live = learn_passive(m, pi, 400, env.episode, 21, {}, 3);
    auto log = format_trace_log(m.ap(), collect_traces(m, pi, env.episode, 400, 21));
    auto offline = learn_passive(m.ap(), parse_trace_log(m.ap(), log));
    EXPECT_EQ(format_machine(live.hypothesis), format_machine(offline.hypothesis));
    EXPECT_THROW((void)learn_passive(m, pi, 0, env.episode, 1), Error);
}

TEST(CompleteTable, RepairBudget) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    ObservationTable t(m.ap(), std::nullopt, 20);
    for (const auto& tr : collect_traces(m, uniform_policy(m), EpisodeSettings{8, {}}, 2000, 2)) t.record(tr);
    EXPECT_THROW(complete_table(t, 1), BudgetExceeded);
}

TEST(PassiveProperties, RandomTracesGiveClosedConsistentTables) {
    Rng rng(env_seed(61));
    for (int it = 0; it < 40; ++it) {
        auto truth = random_prm(rng, {3, 2, 2});
        auto m = random_nmdp(rng, truth, false, 3, 2);
        auto traces = collect_traces(m, uniform_policy(m), EpisodeSettings{5, {}}, 200, rng());
        PassiveConfig cfg;
        cfg.max_experiment_len = 3;
        auto res = learn_passive(truth.ap(), traces, cfg);
        EXPECT_TRUE(res.table.is_closed());
        EXPECT_TRUE(res.table.is_consistent());
        EXPECT_TRUE(res.hypothesis.is_total());
    }
}
