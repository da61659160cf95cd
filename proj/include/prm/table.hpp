#pragma once

#include "prm/format.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace prm {

/// Reward frequencies of one word; absent keys are zero.
using FreqMap = std::map<Reward, std::uint64_t>;

inline std::uint64_t total_count(const FreqMap& f) {
    std::uint64_t n = 0;
    for (auto [g, c] : f) n += c;
    return n;
}

/// Hoeffding radius sqrt(½·ln(2/α))·(1/√N + 1/√N') with α = 1/M³.
inline double hoeffding_threshold(std::uint64_t n, std::uint64_t n_other, double total_samples) {
    const double log_two_over_alpha = std::log(2.0) + 3.0 * std::log(total_samples);
    return std::sqrt(0.5 * log_two_over_alpha) *
           (1.0 / std::sqrt(static_cast<double>(n)) + 1.0 / std::sqrt(static_cast<double>(n_other)));
}

/// Diff: both maps non-empty and some reward's empirical frequency differs by
/// more than the Hoeffding radius at confidence 1/M³.
inline bool statistically_different(const FreqMap& f, const FreqMap& g, double total_samples) {
    const auto n = total_count(f), m = total_count(g);
    if (n == 0 || m == 0) return false;
    if (!(total_samples >= 1)) throw Error("total sample count must be at least 1");
    const double eps = hoeffding_threshold(n, m, total_samples);
    auto freq = [](const FreqMap& h, Reward r, std::uint64_t total) {
        auto it = h.find(r);
        return it == h.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
    };
    for (const auto* side : {&f, &g})
        for (auto [r, c] : *side)
            if (std::abs(freq(f, r, n) - freq(g, r, m)) > eps) return true;
    return false;
}

/// Diff(f, s, s') for any word ↦ frequency function `f`.
template <typename FreqFn>
bool diff(FreqFn&& f, const Word& s, const Word& s_other, double total_samples) {
    return statistically_different(f(s), f(s_other), total_samples);
}

struct ShortlexLess {
    bool operator()(const Word& a, const Word& b) const { return shortlex_less(a, b); }
};

using WordSet = std::set<Word, ShortlexLess>;

/// Witness that (S, E, T) is not consistent: rows s and s' are compatible but
/// their ℓ-successors differ on experiment e.
struct InconsistencyWitness {
    Word s, s_other;
    Label label;
    Word experiment;
};

/// Sampling observation table (S, E, T) with per-word sample counters.
///
/// T and the counters live in a prefix trie since recording a trace touches
/// every one of its prefixes. Recording a non-empty trace also counts one
/// observation of reward 0 for the empty word, which gives row(ε) the
/// annotation the hypothesis initial state (0, row(ε)) assumes.
///
/// `evidence_threshold` (0 disables it) makes two cells incompatible when one
/// holds at least that many observations and the other none. Without it a
/// cell that was never observed is compatible with anything.
class ObservationTable {
public:
    struct Node {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> children;  // (label mask, node index), sorted
        FreqMap freq;
        std::uint64_t total = 0;   // Σ freq
        std::uint64_t sample = 0;  // Sample(w)
    };

    explicit ObservationTable(AtomicPropositions ap, std::optional<std::vector<Label>> alphabet = std::nullopt,
                              std::uint64_t evidence_threshold = 0)
        : ap_(std::move(ap)), evidence_threshold_(evidence_threshold), nodes_(1) {
        alphabet_ = alphabet ? *alphabet : ap_.all_labels();
        std::sort(alphabet_.begin(), alphabet_.end());
        S_.insert(Word{});
        E_.insert(Word{});
    }

    // --- bookkeeping ---------------------------------------------------

    /// For every prefix ℓ₁r₁⋯ℓ_kr_k: T(ℓ₁⋯ℓ_k)(r_k) += 1, Sample(ℓ₁⋯ℓ_k) += 1.
    void record(const EpisodeTrace& trace) {
        if (trace.empty()) return;
        bump(0, 0.0);
        std::uint32_t node = 0;
        for (const auto& step : trace) {
            node = child_or_create(node, step.label);
            bump(node, step.reward);
        }
    }

    void add_count(const Word& w, Reward r, std::uint64_t count, std::uint64_t sample_extra = 0) {
        std::uint32_t node = 0;
        for (auto l : w) node = child_or_create(node, l);
        if (count > 0) nodes_[node].freq[r] += count;
        nodes_[node].total += count;
        nodes_[node].sample += count + sample_extra;
        total_samples_ += count + sample_extra;
    }

    /// Adds all counts of `other` and unions S and E.
    void merge(const ObservationTable& other) {
        if (!(other.ap_ == ap_)) throw Error("cannot merge tables over different propositions");
        other.for_each_word([&](const Word& w, const Node& n) {
            std::uint32_t node = 0;
            for (auto l : w) node = child_or_create(node, l);
            for (auto [r, c] : n.freq) nodes_[node].freq[r] += c;
            nodes_[node].total += n.total;
            nodes_[node].sample += n.sample;
            total_samples_ += n.sample;
        });
        S_.insert(other.S_.begin(), other.S_.end());
        E_.insert(other.E_.begin(), other.E_.end());
    }

    void add_sample_word(const Word& s) { S_.insert(s); }
    void add_experiment(const Word& e) { E_.insert(e); }

    // --- lookups -------------------------------------------------------

    [[nodiscard]] const Node* find(const Word& w) const { return walk(0, w); }
    [[nodiscard]] const Node* find(const Word& a, const Word& b) const {
        const Node* n = walk(0, a);
        return n ? walk(index_of(n), b) : nullptr;
    }
    [[nodiscard]] const Node* find(const Word& a, Label l, const Word& b) const {
        const Node* n = walk(0, a);
        if (!n) return nullptr;
        auto c = child(index_of(n), l);
        return c ? walk(*c, b) : nullptr;
    }

    [[nodiscard]] const FreqMap& freq(const Word& w) const { return freq_of(find(w)); }
    [[nodiscard]] std::uint64_t sample(const Word& w) const {
        const Node* n = find(w);
        return n ? n->sample : 0;
    }

    /// M = Σ Sample(w) over every tracked word.
    [[nodiscard]] std::uint64_t total_samples() const { return total_samples_; }

    // --- statistics ----------------------------------------------------

    [[nodiscard]] bool cells_compatible(const Node* a, const Node* b) const {
        const auto n = a ? a->total : 0, m = b ? b->total : 0;
        if (evidence_threshold_ > 0 && ((n == 0 && m >= evidence_threshold_) || (m == 0 && n >= evidence_threshold_)))
            return false;
        if (n == 0 || m == 0) return true;
        return !statistically_different(a->freq, b->freq, static_cast<double>(std::max<std::uint64_t>(total_samples_, 1)));
    }

    [[nodiscard]] bool compatible_cells(const Word& w, const Word& w_other) const {
        return cells_compatible(find(w), find(w_other));
    }

    /// compat(s, s') over every experiment e ∈ E.
    [[nodiscard]] bool compatible_rows(const Word& s, const Word& s_other) const {
        return first_incompatible_experiment(s, s_other) == nullptr;
    }

    [[nodiscard]] const Word* first_incompatible_experiment(const Word& s, const Word& s_other) const {
        const Node* a = find(s);
        const Node* b = find(s_other);
        for (const auto& e : E_) {
            const Node* ca = a ? walk(index_of(a), e) : nullptr;
            const Node* cb = b ? walk(index_of(b), e) : nullptr;
            if (!cells_compatible(ca, cb)) return &e;
        }
        return nullptr;
    }

    /// rank(s) = Σ_ℓ Σ_γ T(s·ℓ)(γ).
    [[nodiscard]] std::uint64_t rank(const Word& s) const {
        const Node* n = find(s);
        if (!n) return 0;
        std::uint64_t r = 0;
        for (auto [mask, c] : n->children) r += nodes_[c].total;
        return r;
    }

    /// Best S-member row-compatible with the row of `w`: highest rank, then
    /// shortest, then lexicographically smallest.
    [[nodiscard]] std::optional<Word> best_compatible(const Word& w) const {
        std::optional<Word> best;
        std::uint64_t best_rank = 0;
        for (const auto& s : S_) {
            if (!compatible_rows(w, s)) continue;
            auto r = rank(s);
            if (!best || r > best_rank) {  // S iterates in shortlex order, so ties keep the earlier word
                best = s;
                best_rank = r;
            }
        }
        return best;
    }

    /// rep(s) = argmax of rank over {s' ∈ S : compat(s, s')}.
    [[nodiscard]] Word representative(const Word& s) const {
        auto best = best_compatible(s);
        return best ? *best : s;
    }

    /// First s·ℓ (s ∈ S, ℓ in the alphabet) compatible with no row of S.
    [[nodiscard]] std::optional<Word> closedness_witness() const {
        for (const auto& s : S_)
            for (auto l : alphabet_) {
                Word sl = concat(s, l, {});
                if (S_.contains(sl)) continue;
                bool matched = false;
                for (const auto& t : S_)
                    if (compatible_rows(sl, t)) {
                        matched = true;
                        break;
                    }
                if (!matched) return sl;
            }
        return std::nullopt;
    }

    [[nodiscard]] bool is_closed() const { return !closedness_witness(); }

    [[nodiscard]] std::optional<InconsistencyWitness> consistency_witness() const {
        for (auto it = S_.begin(); it != S_.end(); ++it)
            for (auto jt = std::next(it); jt != S_.end(); ++jt) {
                if (!compatible_rows(*it, *jt)) continue;
                for (auto l : alphabet_) {
                    const Node* a = find(*it, l, {});
                    const Node* b = find(*jt, l, {});
                    if (!a || !b) continue;
                    bool shared = false;
                    for (auto [r, c] : a->freq)
                        if (c > 0 && b->freq.contains(r) && b->freq.at(r) > 0) shared = true;
                    if (!shared) continue;
                    Word sl = concat(*it, l, {}), tl = concat(*jt, l, {});
                    if (const Word* e = first_incompatible_experiment(sl, tl)) return InconsistencyWitness{*it, *jt, l, *e};
                }
            }
        return std::nullopt;
    }

    [[nodiscard]] bool is_consistent() const { return !consistency_witness(); }

    // --- accessors -----------------------------------------------------

    [[nodiscard]] const WordSet& samples() const { return S_; }
    [[nodiscard]] const WordSet& experiments() const { return E_; }
    [[nodiscard]] const AtomicPropositions& ap() const { return ap_; }
    [[nodiscard]] const std::vector<Label>& alphabet() const { return alphabet_; }
    [[nodiscard]] std::uint64_t evidence_threshold() const { return evidence_threshold_; }
    void set_evidence_threshold(std::uint64_t t) { evidence_threshold_ = t; }

    /// Γ observed anywhere in T, plus 0.
    [[nodiscard]] std::vector<Reward> observed_rewards() const {
        std::set<Reward> g{0.0};
        for (const auto& n : nodes_)
            for (auto [r, c] : n.freq)
                if (c > 0) g.insert(r);
        return {g.begin(), g.end()};
    }

    /// Visits every word with a node in the trie, in shortlex-compatible DFS order.
    void for_each_word(const std::function<void(const Word&, const Node&)>& fn) const {
        Word w;
        std::function<void(std::uint32_t)> rec = [&](std::uint32_t idx) {
            fn(w, nodes_[idx]);
            for (auto [mask, c] : nodes_[idx].children) {
                w.push_back(Label{mask});
                rec(c);
                w.pop_back();
            }
        };
        rec(0);
    }

private:
    static const FreqMap& freq_of(const Node* n) {
        static const FreqMap empty;
        return n ? n->freq : empty;
    }

    [[nodiscard]] std::uint32_t index_of(const Node* n) const { return static_cast<std::uint32_t>(n - nodes_.data()); }

    [[nodiscard]] std::optional<std::uint32_t> child(std::uint32_t node, Label l) const {
        const auto& ch = nodes_[node].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), l.mask, [](const auto& p, std::uint32_t m) { return p.first < m; });
        if (it == ch.end() || it->first != l.mask) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const Node* walk(std::uint32_t node, const Word& w) const {
        for (auto l : w) {
            auto c = child(node, l);
            if (!c) return nullptr;
            node = *c;
        }
        return &nodes_[node];
    }

    std::uint32_t child_or_create(std::uint32_t node, Label l) {
        auto& ch = nodes_[node].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), l.mask, [](const auto& p, std::uint32_t m) { return p.first < m; });
        if (it != ch.end() && it->first == l.mask) return it->second;
        auto idx = static_cast<std::uint32_t>(nodes_.size());
        ch.insert(it, {l.mask, idx});
        nodes_.emplace_back();  // may reallocate; `ch` is not used afterwards
        return idx;
    }

    void bump(std::uint32_t node, Reward r) {
        auto& n = nodes_[node];
        ++n.freq[r];
        ++n.total;
        ++n.sample;
        ++total_samples_;
    }

    AtomicPropositions ap_;
    std::vector<Label> alphabet_;
    std::uint64_t evidence_threshold_;
    std::vector<Node> nodes_;
    std::uint64_t total_samples_ = 0;
    WordSet S_, E_;
};

/// Table dump: CSV with columns word,reward,count,sample. A word that was
/// sampled but never rewarded gets one row with an empty reward.
inline std::string format_table_csv(const ObservationTable& t) {
    std::ostringstream out;
    out << "word,reward,count,sample\n";
    t.for_each_word([&](const Word& w, const ObservationTable::Node& n) {
        for (auto [r, c] : n.freq) out << t.ap().format(w) << ',' << format_number(r) << ',' << c << ',' << n.sample << '\n';
        if (n.freq.empty() && n.sample > 0) out << t.ap().format(w) << ",,0," << n.sample << '\n';
    });
    return out.str();
}

/// Restores T and the sample counters; S and E start as {ε}.
inline ObservationTable parse_table_csv(const AtomicPropositions& ap, std::string_view text,
                                        std::uint64_t evidence_threshold = 0) {
    ObservationTable t(ap, std::nullopt, evidence_threshold);
    std::map<Word, std::pair<std::uint64_t, std::uint64_t>> seen;  // word ↦ (Σcount, sample)
    std::size_t lineno = 0;
    for (auto line : detail::lines(text)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (lineno == 1 || line.empty()) continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != 4) throw Error("table csv line " + std::to_string(lineno) + ": expected 4 fields");
        auto w = ap.parse_word(fields[0]);
        auto count = static_cast<std::uint64_t>(parse_number(fields[2]));
        auto sample = static_cast<std::uint64_t>(parse_number(fields[3]));
        if (!fields[1].empty()) t.add_count(w, parse_number(fields[1]), count);
        auto& [sum, smp] = seen[w];
        sum += count;
        smp = sample;
    }
    for (auto& [w, cs] : seen)
        if (cs.second > cs.first) t.add_count(w, 0.0, 0, cs.second - cs.first);
    return t;
}

}  // namespace prm
