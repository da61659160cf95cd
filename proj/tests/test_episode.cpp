#include "support.hpp"

#include <fstream>

using namespace prm;
using namespace prm::testing;

TEST(Episodes, SameSeedSameTraces) {
    auto env = load_environment(asset("office.cfg"));
    auto pi = uniform_policy(env.nmdp());
    auto a = collect_traces(env.nmdp(), pi, env.episode, 200, 5);
    auto b = collect_traces(env.nmdp(), pi, env.episode, 200, 5);
    EXPECT_EQ(a, b);
    auto c = collect_traces(env.nmdp(), pi, env.episode, 200, 6);
    EXPECT_NE(a, c);
}

TEST(Episodes, ThreadCountDoesNotChangeTheOutput) {
    auto env = load_environment(asset("office.cfg"));
    auto pi = uniform_policy(env.nmdp());
    auto one = collect_traces(env.nmdp(), pi, env.episode, 301, 11, 1);
    for (unsigned jobs : {2U, 3U, 8U}) EXPECT_EQ(collect_traces(env.nmdp(), pi, env.episode, 301, 11, jobs), one);
}

TEST(Episodes, EpisodeStreamsAreIndependentOfOrder) {
    auto env = load_environment(asset("office.cfg"));
    auto pi = uniform_policy(env.nmdp());
    auto all = collect_traces(env.nmdp(), pi, env.episode, 10, 99);
    auto rng = episode_rng(99, 7);
    EXPECT_EQ(run_episode(env.nmdp(), pi, env.episode, rng), all[7]);
}

TEST(Episodes, TerminalLabelsAndLengthCap) {
    auto env = load_environment(asset("office.cfg"));
    auto pi = shortest_path_policy(env.world);
    Rng rng(1);
    auto t = run_episode(env.nmdp(), pi, env.episode, rng);
    ASSERT_EQ(t.size(), 2U);
    EXPECT_EQ(t.back().label, lbl(env.nmdp().ap(), "o"));

    EpisodeSettings capped{5, {}};
    auto u = run_episode(env.nmdp(), uniform_policy(env.nmdp()), capped, rng);
    EXPECT_EQ(u.size(), 5U);
}

TEST(Episodes, TrajectoryMatchesTrace) {
    auto env = load_environment(asset("office.cfg"));
    const auto& m = env.nmdp();
    auto pi = uniform_policy(m);
    Rng rng(12);
    Trajectory t;
    auto trace = run_episode(m, pi, EpisodeSettings{30, {}}, rng, &t);
    ASSERT_EQ(t.states.size(), trace.size() + 1);
    ASSERT_EQ(t.actions.size(), trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k)
        EXPECT_EQ(*m.labeling(t.states[k], t.actions[k], t.states[k + 1]), trace[k].label);
    EXPECT_GT(trajectory_probability(m, pi, t), 0.0);
}

TEST(TraceLog, RoundTrip) {
    auto env = load_environment(asset("office.cfg"));
    const auto& ap = env.nmdp().ap();
    auto traces = collect_traces(env.nmdp(), uniform_policy(env.nmdp()), env.episode, 50, 3);
    traces.push_back({});
    auto text = format_trace_log(ap, traces);
    EXPECT_EQ(parse_trace_log(ap, text), traces);
    EXPECT_EQ(format_trace_log(ap, parse_trace_log(ap, text)), text);
}

TEST(TraceLog, Format) {
    auto ap = office_ap();
    auto text = format_trace_log(ap, {trace_of(ap, {{"", 0}, {"c", 0}, {"o", 1}})});
    EXPECT_EQ(text, "ε;0;c;0;o;1\n");
    EXPECT_THROW((void)parse_trace_log(ap, "c;0;o\n"), Error);
    try {
        (void)parse_trace_log(ap, "c;0\nq;1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

namespace {

std::filesystem::path scratch_config(const std::string& name, const std::string& body) {
    auto dir = std::filesystem::temp_directory_path() / "prm_episode_test";
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(asset("officeworld.map"), dir / "officeworld.map",
                               std::filesystem::copy_options::overwrite_existing);
    std::filesystem::copy_file(asset("coffee.prm"), dir / "coffee.prm", std::filesystem::copy_options::overwrite_existing);
    auto path = dir / name;
    std::ofstream(path) << body;
    return path;
}

}  // namespace

TEST(EnvironmentConfig, ShippedConfig) {
    auto env = load_environment(asset("office.cfg"));
    EXPECT_EQ(env.episode.n_episode, 100U);
    EXPECT_EQ(env.seed, 7U);
    EXPECT_EQ(env.episode.terminal_labels, (std::set<Label>{lbl(env.nmdp().ap(), "o")}));
    EXPECT_EQ(env.nmdp().state_count(), 35U);
}

TEST(EnvironmentConfig, Errors) {
    EXPECT_THROW((void)load_environment(scratch_config("a.cfg", "map: officeworld.map\n")), Error);
    EXPECT_THROW((void)load_environment(scratch_config("b.cfg", "map: officeworld.map\ntruth_prm: coffee.prm\ncolour: red\n")),
                 Error);
    EXPECT_THROW((void)load_environment(scratch_config("c.cfg", "map officeworld.map\n")), Error);
    EXPECT_THROW((void)load_environment(scratch_config("d.cfg", "map: officeworld.map\ntruth_prm: coffee.prm\nn_episode: 0\n")),
                 Error);
    EXPECT_THROW((void)load_environment(scratch_config("e.cfg", "map: nowhere.map\ntruth_prm: coffee.prm\n")), Error);
    EXPECT_NO_THROW((void)load_environment(scratch_config("f.cfg", "# minimal\nmap: officeworld.map\ntruth_prm: coffee.prm\n")));
}
