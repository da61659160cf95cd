#pragma once

// Helpers shared by the unit test suites.

#include "prm/prm.hpp"
#include "random_instances.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

namespace prm::testing {

inline std::filesystem::path asset(const std::string& name) { return std::filesystem::path(PRM_ASSETS) / name; }

inline AtomicPropositions office_ap() { return AtomicPropositions({"*", "c", "o"}); }

inline Label lbl(const AtomicPropositions& ap, std::string_view text) { return ap.parse_label(text); }
inline Word wrd(const AtomicPropositions& ap, std::string_view text) { return ap.parse_word(text); }

inline EpisodeTrace trace_of(const AtomicPropositions& ap, std::initializer_list<std::pair<const char*, Reward>> steps) {
    EpisodeTrace t;
    for (auto [l, r] : steps) t.push_back({ap.parse_label(l), r});
    return t;
}

inline std::uint64_t env_seed(std::uint64_t fallback) {
    if (const char* s = std::getenv("PRM_TEST_SEED")) return std::strtoull(s, nullptr, 10);
    return fallback;
}

}  // namespace prm::testing
