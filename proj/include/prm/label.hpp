#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace prm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a search or learning loop runs out of its configured budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// Rewards are compared by exact value; Γ is a finite set of doubles.
using Reward = double;

inline constexpr std::string_view kEmptyLabelText = "ε";

/// A subset of the atomic propositions, stored as a bitmask over the
/// (sorted) proposition list of the owning AtomicPropositions.
struct Label {
    std::uint32_t mask = 0;

    constexpr Label() = default;
    constexpr explicit Label(std::uint32_t m) : mask(m) {}

    [[nodiscard]] constexpr bool empty() const { return mask == 0; }
    [[nodiscard]] constexpr bool contains(std::size_t prop) const { return (mask >> prop) & 1U; }

    friend constexpr auto operator<=>(Label, Label) = default;
};

using Word = std::vector<Label>;

inline Word concat(const Word& a, const Word& b) {
    Word out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline Word concat(const Word& a, Label l, const Word& b) {
    Word out;
    out.reserve(a.size() + 1 + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.push_back(l);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline Word prefix(const Word& w, std::size_t n) {
    return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(std::min(n, w.size())));
}

/// Shortlex order: shorter words first, then lexicographic by mask.
inline bool shortlex_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

/// Ordered finite set of proposition names. Names are kept sorted so that a
/// label's bitmask and its text form are both canonical.
class AtomicPropositions {
public:
    static constexpr std::size_t kMaxProps = 16;

    AtomicPropositions() = default;

    explicit AtomicPropositions(std::vector<std::string> names) : names_(std::move(names)) {
        std::sort(names_.begin(), names_.end());
        for (std::size_t i = 0; i < names_.size(); ++i) {
            const auto& n = names_[i];
            if (n.empty()) throw Error("atomic proposition names must be non-empty");
            if (n.find_first_of("&;,~ \t/-:") != std::string::npos || n == kEmptyLabelText)
                throw Error("invalid atomic proposition name '" + n + "'");
            if (i > 0 && names_[i - 1] == n) throw Error("duplicate atomic proposition '" + n + "'");
        }
        if (names_.size() > kMaxProps)
            throw Error("at most " + std::to_string(kMaxProps) + " atomic propositions are supported");
    }

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] std::size_t label_count() const { return std::size_t{1} << names_.size(); }

    [[nodiscard]] std::vector<Label> all_labels() const {
        std::vector<Label> out;
        out.reserve(label_count());
        for (std::uint32_t m = 0; m < label_count(); ++m) out.emplace_back(m);
        return out;
    }

    [[nodiscard]] bool valid(Label l) const { return l.mask < label_count(); }

    [[nodiscard]] std::size_t index_of(std::string_view name) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name)
            throw Error("unknown atomic proposition '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - names_.begin());
    }

    /// Sorted member names joined by '&'; the empty label prints as "ε".
    [[nodiscard]] std::string format(Label l) const {
        if (l.empty()) return std::string(kEmptyLabelText);
        std::string out;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!l.contains(i)) continue;
            if (!out.empty()) out += '&';
            out += names_[i];
        }
        return out;
    }

    /// Accepts "ε", "~" or the empty string for the empty label.
    [[nodiscard]] Label parse_label(std::string_view text) const {
        if (text.empty() || text == kEmptyLabelText || text == "~") return Label{};
        std::uint32_t mask = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto amp = text.find('&', start);
            auto part = text.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
            mask |= 1U << index_of(part);
            if (amp == std::string_view::npos) break;
            start = amp + 1;
        }
        return Label{mask};
    }

    /// Labels joined by ';'. The empty word is the empty string.
    [[nodiscard]] std::string format(const Word& w) const {
        std::string out;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) out += ';';
            out += format(w[i]);
        }
        return out;
    }

    [[nodiscard]] Word parse_word(std::string_view text) const {
        Word w;
        if (text.empty()) return w;
        std::size_t start = 0;
        while (true) {
            auto semi = text.find(';', start);
            w.push_back(parse_label(text.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start)));
            if (semi == std::string_view::npos) break;
            start = semi + 1;
        }
        return w;
    }

    friend bool operator==(const AtomicPropositions&, const AtomicPropositions&) = default;

private:
    std::vector<std::string> names_;
};

// Shortest round-trip text for doubles, so printed machines re-parse bit-exactly.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw Error("invalid number '" + std::string(text) + "'");
    return v;
}

/// Distribution over rewards, keyed by value.
using RewardDistribution = std::map<Reward, double>;

/// One observed transition of an episode: its label and the reward received.
struct TraceStep {
    Label label;
    Reward reward = 0.0;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

/// λ = ℓ₁r₁⋯ℓ_kr_k.
using EpisodeTrace = std::vector<TraceStep>;

inline Word label_word(const EpisodeTrace& t) {
    Word w;
    w.reserve(t.size());
    for (const auto& s : t) w.push_back(s.label);
    return w;
}

}  // namespace prm
