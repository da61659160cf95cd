#pragma once

#include "prm/format.hpp"
#include "prm/nmdp.hpp"

#include <array>
#include <cmath>
#include <queue>

namespace prm {

enum class Cell : char { Empty = '.', Wall = '#', Coffee = 'c', Office = 'o', Decoration = '*', Start = 'A' };

struct GridMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Cell> cells;  // row-major

    [[nodiscard]] Cell at(std::size_t row, std::size_t col) const { return cells.at(row * width + col); }
};

inline GridMap load_gridmap(std::string_view text) {
    GridMap g;
    std::size_t start_count = 0;
    std::size_t row = 0;
    for (auto raw : detail::lines(text)) {
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (raw.empty()) continue;
        ++row;
        if (g.width == 0) g.width = raw.size();
        if (raw.size() != g.width)
            throw Error("map row " + std::to_string(row) + " has width " + std::to_string(raw.size()) + ", expected " +
                        std::to_string(g.width));
        for (std::size_t col = 0; col < raw.size(); ++col) {
            char c = raw[col];
            if (std::string_view(".#co*A").find(c) == std::string_view::npos)
                throw Error("map row " + std::to_string(row) + " column " + std::to_string(col + 1) +
                            ": unexpected character '" + std::string(1, c) + "'");
            if (c == 'A') ++start_count;
            g.cells.push_back(static_cast<Cell>(c));
        }
    }
    g.height = row;
    if (g.height == 0) throw Error("empty map");
    if (start_count != 1) throw Error("map must contain exactly one start 'A', found " + std::to_string(start_count));
    return g;
}

inline constexpr std::array<const char*, 4> kGridActions{"N", "S", "E", "W"};

struct OfficeWorld {
    GridMap map;
    Nmdp nmdp;
    std::vector<std::size_t> cell_of_state;  // state index ↦ row-major cell index
    std::vector<std::size_t> state_of_cell;  // cell index ↦ state index (npos for walls)
};

namespace detail {
inline std::pair<long, long> action_delta(std::size_t a) {
    switch (a) {
        case 0: return {-1, 0};
        case 1: return {1, 0};
        case 2: return {0, 1};
        default: return {0, -1};
    }
}
}  // namespace detail

/// Non-wall cells become states; N/S/E/W moves are deterministic and blocked
/// moves leave the agent in place. A transition is labelled with the
/// propositions of its destination cell.
inline OfficeWorld build_office_nmdp(const GridMap& map, const RewardMachine& truth) {
    const auto& ap = truth.ap();
    auto prop_label = [&](Cell c) -> Label {
        switch (c) {
            case Cell::Coffee: return Label{1U << ap.index_of("c")};
            case Cell::Office: return Label{1U << ap.index_of("o")};
            case Cell::Decoration: return Label{1U << ap.index_of("*")};
            default: return Label{};
        }
    };

    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> cell_of_state, state_of_cell(map.cells.size(), npos);
    std::vector<std::string> names;
    std::size_t init = 0;
    for (std::size_t i = 0; i < map.cells.size(); ++i) {
        if (map.cells[i] == Cell::Wall) continue;
        state_of_cell[i] = cell_of_state.size();
        if (map.cells[i] == Cell::Start) init = cell_of_state.size();
        cell_of_state.push_back(i);
        names.push_back("r" + std::to_string(i / map.width) + "c" + std::to_string(i % map.width));
    }

    Nmdp m(ap, names, {kGridActions.begin(), kGridActions.end()}, init, PrmBacked{truth});
    for (std::size_t x = 0; x < cell_of_state.size(); ++x) {
        const long row = static_cast<long>(cell_of_state[x] / map.width);
        const long col = static_cast<long>(cell_of_state[x] % map.width);
        for (std::size_t a = 0; a < kGridActions.size(); ++a) {
            auto [dr, dc] = detail::action_delta(a);
            long r2 = row + dr, c2 = col + dc;
            std::size_t dest = cell_of_state[x];
            if (r2 >= 0 && c2 >= 0 && r2 < static_cast<long>(map.height) && c2 < static_cast<long>(map.width)) {
                auto cand = static_cast<std::size_t>(r2) * map.width + static_cast<std::size_t>(c2);
                if (map.cells[cand] != Cell::Wall) dest = cand;
            }
            m.set_transition(x, a, {{state_of_cell[dest], 1.0, prop_label(map.cells[dest])}});
        }
    }
    return {map, std::move(m), std::move(cell_of_state), std::move(state_of_cell)};
}

/// Ground-truth task: pick up coffee (10% of the time it is weak), deliver it
/// to the office for reward 1 (0 for weak coffee); touching a decoration
/// fails the task. Labels other than exactly {c}, {o} or one containing *
/// leave the state unchanged.
inline RewardMachine coffee_machine(double good_coffee = 0.9) {
    AtomicPropositions ap({"*", "c", "o"});
    RewardMachine h(ap, {0.0, 1.0});
    for (auto n : {"y0", "y1", "y2", "y3", "y4"}) h.add_state(n);
    h.set_initial(0);
    const Label c{1U << ap.index_of("c")}, o{1U << ap.index_of("o")};
    const auto star = ap.index_of("*");
    const double bad_coffee = std::round((1.0 - good_coffee) * 1e12) / 1e12;
    for (auto l : ap.all_labels()) {
        for (std::size_t y = 0; y < 5; ++y) {
            if (y < 3 && l.contains(star)) {
                h.set_transition(y, l, 0.0, {{4, 1.0}});
            } else if (y == 0 && l == c) {
                h.set_transition(y, l, 0.0, {{1, good_coffee}, {2, bad_coffee}});
            } else if (y == 1 && l == o) {
                h.set_transition(y, l, 1.0, {{3, 1.0}});
            } else if (y == 2 && l == o) {
                h.set_transition(y, l, 0.0, {{3, 1.0}});
            } else {
                h.set_transition(y, l, 0.0, {{y, 1.0}});
            }
        }
    }
    return h;
}

/// BFS distances (and first moves) to the nearest cell satisfying `target`,
/// never passing through decorations.
inline std::vector<std::size_t> moves_towards(const OfficeWorld& w, Cell target) {
    const auto& m = w.nmdp;
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> dist(m.state_count(), npos), move(m.state_count(), 0);
    std::queue<std::size_t> q;
    for (std::size_t x = 0; x < m.state_count(); ++x)
        if (w.map.cells[w.cell_of_state[x]] == target) {
            dist[x] = 0;
            q.push(x);
        }
    // reverse BFS: predecessors of x are states with a move into x
    while (!q.empty()) {
        auto x = q.front();
        q.pop();
        for (std::size_t p = 0; p < m.state_count(); ++p) {
            if (dist[p] != npos || w.map.cells[w.cell_of_state[p]] == Cell::Decoration) continue;
            for (std::size_t a = 0; a < m.action_count(); ++a) {
                if (m.outcomes(p, a).front().next != x) continue;
                dist[p] = dist[x] + 1;
                move[p] = a;
                q.push(p);
                break;
            }
        }
    }
    return move;
}

/// Positional policy following a shortest decoration-free route from the
/// start to the coffee and from there to the office. Throws if the two legs
/// would need different actions in the same cell.
inline PositionalPolicy shortest_path_policy(const OfficeWorld& w) {
    const auto& m = w.nmdp;
    auto to_coffee = moves_towards(w, Cell::Coffee);
    auto to_office = moves_towards(w, Cell::Office);
    std::vector<std::size_t> action = to_coffee;
    std::vector<int> leg(m.state_count(), 0);
    auto walk = [&](std::size_t from, const std::vector<std::size_t>& moves, Cell target, int id) {
        std::size_t x = from;
        for (std::size_t guard = 0; w.map.cells[w.cell_of_state[x]] != target; ++guard) {
            if (guard > m.state_count()) throw Error("no decoration-free route in the map");
            if (leg[x] != 0 && action[x] != moves[x]) throw Error("shortest route is not positional");
            leg[x] = id;
            action[x] = moves[x];
            x = m.outcomes(x, moves[x]).front().next;
        }
        return x;
    };
    auto coffee = walk(m.initial(), to_coffee, Cell::Coffee, 1);
    walk(coffee, to_office, Cell::Office, 2);
    return pure_policy(m, action);
}

/// Deterministic two-state task rewarding alternate visits to the two cells
/// of a corridor: reward 1 for entering b after a, and a after b.
inline RewardMachine patrol_machine() {
    AtomicPropositions ap({"a", "b"});
    RewardMachine h(ap, {0.0, 1.0});
    h.add_state("want_b");
    h.add_state("want_a");
    h.set_initial(0);
    const Label a{1U << ap.index_of("a")}, b{1U << ap.index_of("b")};
    for (auto l : ap.all_labels()) {
        h.set_transition(0, l, l == b ? 1.0 : 0.0, {{l == b ? 1U : 0U, 1.0}});
        h.set_transition(1, l, l == a ? 1.0 : 0.0, {{l == a ? 0U : 1U, 1.0}});
    }
    return h;
}

/// Two-cell corridor; actions "stay" and "move", transitions labelled with
/// the destination cell ({a} left, {b} right).
inline Nmdp patrol_world(const RewardMachine& truth = patrol_machine()) {
    const auto& ap = truth.ap();
    const Label a{1U << ap.index_of("a")}, b{1U << ap.index_of("b")};
    Nmdp m(ap, {"left", "right"}, {"stay", "move"}, 0, PrmBacked{truth});
    m.set_transition(0, 0, {{0, 1.0, a}});
    m.set_transition(0, 1, {{1, 1.0, b}});
    m.set_transition(1, 0, {{1, 1.0, b}});
    m.set_transition(1, 1, {{0, 1.0, a}});
    return m;
}

}  // namespace prm
