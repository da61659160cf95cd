#pragma once

#include "prm/machine.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace prm {

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    s = trim(s);
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string_view> lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

}  // namespace detail

// Text format:
//   ap: a,b
//   gamma: 0,1
//   states: y0,y1
//   init: y0
//   y0 --a&b/1--> y1 : 0.5
// One line per (state, label, successor). '#' starts a comment line.

inline std::string format_machine(const RewardMachine& h) {
    std::ostringstream out;
    out << "ap: ";
    for (std::size_t i = 0; i < h.ap().size(); ++i) out << (i ? "," : "") << h.ap().names()[i];
    out << "\ngamma: ";
    for (std::size_t i = 0; i < h.gamma().size(); ++i) out << (i ? "," : "") << format_number(h.gamma()[i]);
    out << "\nstates: ";
    for (std::size_t i = 0; i < h.state_count(); ++i) out << (i ? "," : "") << h.state_name(i);
    out << "\ninit: " << (h.state_count() ? h.state_name(h.initial()) : "") << '\n';
    for (std::size_t y = 0; y < h.state_count(); ++y)
        for (const auto& [mask, e] : h.edges(y))
            for (const auto& s : e.successors)
                out << h.state_name(y) << " --" << h.ap().format(Label{mask}) << '/' << format_number(e.reward)
                    << "--> " << h.state_name(s.state) << " : " << format_number(s.prob) << '\n';
    return out.str();
}

inline RewardMachine parse_machine(std::string_view text) {
    std::optional<AtomicPropositions> ap;
    std::vector<Reward> gamma;
    bool have_gamma = false;
    std::vector<std::string> states;
    std::string init;
    struct Line {
        std::string src, dst;
        std::string label;
        Reward reward;
        double prob;
        std::size_t lineno;
    };
    std::vector<Line> transitions;

    std::size_t lineno = 0;
    for (auto raw : detail::lines(text)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto fail = [&](const std::string& msg) { return Error("line " + std::to_string(lineno) + ": " + msg); };
        auto arrow = line.find(" --");
        if (arrow != std::string_view::npos) {
            auto slash = line.find('/', arrow + 3);
            auto end = slash == std::string_view::npos ? slash : line.find("--> ", slash + 1);
            auto colon = end == std::string_view::npos ? end : line.rfind(" : ");
            if (slash == std::string_view::npos || end == std::string_view::npos || colon == std::string_view::npos || colon < end)
                throw fail("malformed transition '" + std::string(line) + "'");
            try {
                transitions.push_back({std::string(detail::trim(line.substr(0, arrow))),
                                       std::string(detail::trim(line.substr(end + 4, colon - end - 4))),
                                       std::string(line.substr(arrow + 3, slash - arrow - 3)),
                                       parse_number(line.substr(slash + 1, end - slash - 1)),
                                       parse_number(line.substr(colon + 3)), lineno});
            } catch (const Error& e) {
                throw fail(e.what());
            }
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string_view::npos) throw fail("expected 'key: value' or a transition");
        auto key = detail::trim(line.substr(0, colon));
        auto value = line.substr(colon + 1);
        if (key == "ap") {
            ap.emplace(detail::split(value, ','));
        } else if (key == "gamma") {
            for (auto& g : detail::split(value, ',')) gamma.push_back(parse_number(g));
            have_gamma = true;
        } else if (key == "states") {
            states = detail::split(value, ',');
        } else if (key == "init") {
            init = std::string(detail::trim(value));
        } else {
            throw fail("unknown header '" + std::string(key) + "'");
        }
    }
    if (!ap) throw Error("missing 'ap:' header");
    if (!have_gamma) throw Error("missing 'gamma:' header");
    if (init.empty()) throw Error("missing 'init:' header");

    RewardMachine h(*ap, gamma);
    for (auto& s : states) h.add_state(s);
    auto state_of = [&](const std::string& name) {
        if (auto y = h.find_state(name)) return *y;
        return h.add_state(name);
    };
    h.set_initial(state_of(init));

    struct Pending {
        Reward reward;
        std::vector<Successor> succ;
        std::size_t lineno;
    };
    std::map<std::pair<std::size_t, std::uint32_t>, Pending> pending;
    for (const auto& t : transitions) {
        auto y = state_of(t.src);
        auto l = h.ap().parse_label(t.label);
        auto d = state_of(t.dst);
        auto [it, fresh] = pending.try_emplace({y, l.mask}, Pending{t.reward, {}, t.lineno});
        if (!fresh && it->second.reward != t.reward)
            throw Error("line " + std::to_string(t.lineno) + ": conflicting rewards for (" + t.src + ", " + t.label + ")");
        it->second.succ.push_back({d, t.prob});
    }
    for (auto& [key, p] : pending) {
        try {
            h.set_transition(key.first, Label{key.second}, p.reward, std::move(p.succ));
        } catch (const Error& e) {
            throw Error("line " + std::to_string(p.lineno) + ": " + e.what());
        }
    }
    return h;
}

inline RewardMachine load_machine(const std::filesystem::path& path) { return parse_machine(read_text_file(path)); }

namespace detail {
inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}
}  // namespace detail

/// Graphviz rendering; each edge is labelled ⟨label, reward⟩ : probability.
inline std::string to_dot(const RewardMachine& h, std::string_view name = "prm") {
    std::ostringstream out;
    out << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=circle];\n  __init [shape=point];\n";
    for (std::size_t y = 0; y < h.state_count(); ++y) out << "  " << detail::dot_quote(h.state_name(y)) << ";\n";
    if (h.state_count()) out << "  __init -> " << detail::dot_quote(h.state_name(h.initial())) << ";\n";
    for (std::size_t y = 0; y < h.state_count(); ++y)
        for (const auto& [mask, e] : h.edges(y))
            for (const auto& s : e.successors) {
                std::string label = "⟨" + h.ap().format(Label{mask}) + ", " + format_number(e.reward) + "⟩ : " +
                                    format_number(s.prob);
                out << "  " << detail::dot_quote(h.state_name(y)) << " -> " << detail::dot_quote(h.state_name(s.state))
                    << " [label=" << detail::dot_quote(label) << "];\n";
            }
    out << "}\n";
    return out.str();
}

}  // namespace prm
