// prmlearn: simulate environments, learn probabilistic reward machines, and
// check them against the ground truth.

#include "prm/prm.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kConfigError = 1;
constexpr int kBudgetExhausted = 2;

struct Common {
    std::string env;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
};

prm::Environment open_env(const Common& c) {
    auto env = prm::load_environment(c.env);
    if (c.seed) env.seed = *c.seed;
    return env;
}

// Policy file: one "<state> <action>" pair per line; '#' starts a comment.
prm::PositionalPolicy load_policy(const prm::Nmdp& m, const std::string& path) {
    std::vector<std::size_t> action(m.state_count(), m.action_count());
    std::map<std::string, std::size_t> state_index, action_index;
    for (std::size_t x = 0; x < m.state_count(); ++x) state_index[m.state_name(x)] = x;
    for (std::size_t a = 0; a < m.action_count(); ++a) action_index[m.action_name(a)] = a;
    std::size_t lineno = 0;
    const auto text = prm::read_text_file(path);
    for (auto raw : prm::detail::lines(text)) {
        ++lineno;
        auto line = prm::detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        std::istringstream in{std::string(line)};
        std::string s, a;
        if (!(in >> s >> a) || !state_index.contains(s) || !action_index.contains(a))
            throw prm::Error(path + ":" + std::to_string(lineno) + ": expected '<state> <action>'");
        action[state_index[s]] = action_index[a];
    }
    for (std::size_t x = 0; x < m.state_count(); ++x)
        if (action[x] == m.action_count()) action[x] = m.available_actions(x).front();
    return prm::pure_policy(m, action);
}

prm::Policy make_policy(const prm::Environment& env, const std::string& choice) {
    if (choice == "shortest-path") return prm::shortest_path_policy(env.world);
    if (choice == "uniform") return prm::uniform_policy(env.nmdp());
    return load_policy(env.nmdp(), choice);
}

std::string decimal(double d) {
    auto s = prm::format_number(d);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void add_common(CLI::App* cmd, Common& c, bool jobs) {
    cmd->add_option("--env", c.env, "environment config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "random seed (overrides the config)");
    if (jobs) cmd->add_option("--jobs", c.jobs, "threads for episode collection")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn probabilistic reward machines from episodes of a non-Markovian environment"};
    app.require_subcommand(1);

    Common common;
    std::string policy = "shortest-path", out, dot, table_csv, traces_path, report, budget_text = "200,500,50,100";
    std::size_t episodes = 1000, max_len = 5, node_budget = 1000, max_rounds = 200, max_exp_len = 12;
    std::uint64_t n_check = 20;
    std::string hypothesis_path, truth_path, word_text, criterion = "label", rho = "target", advance = "sample";
    std::string prm_path, name = "prm";

    auto* simulate = app.add_subcommand("simulate", "roll out a policy and log its traces");
    add_common(simulate, common, true);
    simulate->add_option("--policy", policy, "shortest-path, uniform, or a policy file");
    simulate->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
    simulate->add_option("--out", out)->required();

    auto* passive = app.add_subcommand("learn-passive", "learn the reward signal behind a fixed policy");
    add_common(passive, common, true);
    passive->add_option("--policy", policy, "shortest-path, uniform, or a policy file");
    passive->add_option("--traces", traces_path, "learn from a trace log instead of fresh rollouts")
        ->check(CLI::ExistingFile);
    passive->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
    passive->add_option("--n-check", n_check, "samples a row needs before it becomes a state")
        ->check(CLI::PositiveNumber);
    passive->add_option("--max-experiment-len", max_exp_len)->check(CLI::PositiveNumber);
    passive->add_option("--out", out)->required();
    passive->add_option("--dot", dot);
    passive->add_option("--table", table_csv);
    passive->add_option("--report", report);

    auto* active = app.add_subcommand("learn-active", "learn the reward machine with RL-primed queries");
    add_common(active, common, false);
    active->add_option("--budget", budget_text, "n_check,n_query,n_stop,n_episode");
    active->add_option("--max-rounds", max_rounds)->check(CLI::PositiveNumber);
    active->add_option("--rho", rho)->check(CLI::IsMember({"target", "source"}));
    active->add_option("--advance", advance, "how the learner's machine moves on stochastic edges")
        ->check(CLI::IsMember({"sample", "argmax"}));
    active->add_option("--out", out)->required();
    active->add_option("--report", report);
    active->add_option("--dot", dot);
    active->add_option("--table", table_csv);

    auto* encoding = app.add_subcommand("eval-encoding", "distance between a hypothesis and the true machine");
    encoding->add_option("--hypothesis", hypothesis_path)->required()->check(CLI::ExistingFile);
    encoding->add_option("--truth", truth_path)->required()->check(CLI::ExistingFile);
    encoding->add_option("--max-len", max_len)->check(CLI::PositiveNumber);
    encoding->add_option("--env", common.env, "restrict words to labels the environment emits")
        ->check(CLI::ExistingFile);

    auto* mq = app.add_subcommand("mq", "search for a trajectory realizing a label word");
    mq->add_option("--env", common.env)->required()->check(CLI::ExistingFile);
    mq->add_option("--word", word_text, "labels separated by ';', '&' inside a label, '~' for the empty label")
        ->required();
    mq->add_option("--max-len", max_len)->check(CLI::PositiveNumber);
    mq->add_option("--criterion", criterion)->check(CLI::IsMember({"label", "positive_reward"}));
    mq->add_option("--node-budget", node_budget)->check(CLI::PositiveNumber);

    auto* export_dot = app.add_subcommand("export-dot", "render a machine file as Graphviz");
    export_dot->add_option("--prm", prm_path)->required()->check(CLI::ExistingFile);
    export_dot->add_option("--out", out)->required();
    export_dot->add_option("--name", name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*simulate) {
            auto env = open_env(common);
            auto traces = prm::collect_traces(env.nmdp(), make_policy(env, policy), env.episode, episodes, env.seed,
                                              common.jobs);
            prm::write_text_file(out, prm::format_trace_log(env.nmdp().ap(), traces));
            std::cout << "wrote " << traces.size() << " traces to " << out << '\n';
        } else if (*passive) {
            auto env = open_env(common);
            prm::PassiveConfig cfg;
            cfg.n_check = n_check;
            cfg.max_experiment_len = max_exp_len;
            auto traces = traces_path.empty()
                              ? prm::collect_traces(env.nmdp(), make_policy(env, policy), env.episode, episodes,
                                                    env.seed, common.jobs)
                              : prm::parse_trace_log(env.nmdp().ap(), prm::read_text_file(traces_path));
            auto res = prm::learn_passive(env.nmdp().ap(), traces, cfg);
            prm::write_text_file(out, prm::format_machine(res.hypothesis));
            if (!dot.empty()) prm::write_text_file(dot, prm::to_dot(res.hypothesis, "reconstructed"));
            if (!table_csv.empty()) prm::write_text_file(table_csv, prm::format_table_csv(res.table));
            if (!report.empty()) prm::write_text_file(report, prm::format_passive_report(res));
            std::cout << prm::format_passive_report(res);
        } else if (*active) {
            auto env = open_env(common);
            auto parts = prm::detail::split(budget_text, ',');
            if (parts.size() != 4) throw prm::Error("--budget expects n_check,n_query,n_stop,n_episode");
            prm::LearnerConfig cfg;
            cfg.n_check = static_cast<std::uint64_t>(prm::parse_number(parts[0]));
            cfg.n_query = static_cast<std::size_t>(prm::parse_number(parts[1]));
            cfg.n_stop = static_cast<std::size_t>(prm::parse_number(parts[2]));
            cfg.n_episode = static_cast<std::size_t>(prm::parse_number(parts[3]));
            cfg.seed = env.seed;
            cfg.max_rounds = max_rounds;
            cfg.rho = rho == "source" ? prm::RhoConvention::Source : prm::RhoConvention::Target;
            cfg.machine_advance = advance == "argmax" ? prm::MachineAdvance::Argmax : prm::MachineAdvance::Sample;
            cfg.terminal_labels = env.episode.terminal_labels;
            auto res = prm::learn_active(env.nmdp(), cfg);
            prm::write_text_file(out, prm::format_machine(res.hypothesis));
            auto text = prm::format_report(env.nmdp().ap(), res);
            if (!report.empty()) prm::write_text_file(report, text);
            if (!dot.empty()) prm::write_text_file(dot, prm::to_dot(res.hypothesis, "hypothesis"));
            if (!table_csv.empty()) prm::write_text_file(table_csv, prm::format_table_csv(res.table));
            std::cout << text << "wall_seconds: " << res.seconds << '\n';
            if (res.budget_exhausted) {
                std::cerr << "learning stopped: budget exhausted\n";
                return kBudgetExhausted;
            }
        } else if (*encoding) {
            auto h = prm::load_machine(hypothesis_path);
            auto truth = prm::load_machine(truth_path);
            std::optional<std::vector<prm::Label>> alphabet;
            if (!common.env.empty()) alphabet = prm::load_environment(common.env).nmdp().label_range();
            auto rep = prm::encoding_distance(h, truth, max_len, alphabet);
            std::cout << decimal(rep.distance) << '\n';
            if (rep.distance > 0) std::cerr << "worst word: " << truth.ap().format(rep.worst) << '\n';
        } else if (*mq) {
            auto env = prm::load_environment(common.env);
            std::string w = word_text;
            auto word = env.nmdp().ap().parse_word(w);
            auto t = prm::brute_force_word_realizability(
                env.nmdp(), word, std::max(max_len, word.size()),
                {criterion == "positive_reward" ? prm::MqCriterion::PositiveReward : prm::MqCriterion::LabelOnly,
                 node_budget});
            if (!t) {
                std::cout << "unrealizable\n";
            } else {
                for (std::size_t i = 0; i < t->actions.size(); ++i)
                    std::cout << (i ? " " : "") << env.nmdp().action_name(t->actions[i]);
                std::cout << '\n';
            }
        } else if (*export_dot) {
            prm::write_text_file(out, prm::to_dot(prm::load_machine(prm_path), name));
        }
    } catch (const prm::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBudgetExhausted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return 0;
}
