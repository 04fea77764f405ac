#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <string_view>

namespace lcr::testing {

/// Textbook recursive edit distance, no memoisation.
inline std::size_t lev_oracle(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::size_t sub = lev_oracle(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
    const std::size_t del = lev_oracle(a.substr(1), b) + 1;
    const std::size_t ins = lev_oracle(a, b.substr(1)) + 1;
    return std::min({sub, del, ins});
}

inline double norm_oracle(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 0.0;
    return static_cast<double>(lev_oracle(a, b) + lev_oracle(b, a)) / static_cast<double>(a.size() + b.size());
}

/// Random well-formed aligned formula with up to `ops` binary operators.
inline std::string random_formula(std::mt19937_64& rng, int ops) {
    static const char kOps[] = {'+', '-', '*', '/'};
    if (ops <= 0) return (rng() % 6 == 0) ? "-@" : "@";
    const int left = static_cast<int>(rng() % static_cast<unsigned>(ops));
    std::string l = random_formula(rng, left);
    std::string r = random_formula(rng, ops - 1 - left);
    if (rng() % 3 == 0) l = "(" + l + ")";
    if (rng() % 3 == 0) r = "(" + r + ")";
    return l + kOps[rng() % 4] + r;
}

/// A branch with no depth-0 binary operator: an atom, a negated atom, or a
/// parenthesised formula.
inline std::string random_branch(std::mt19937_64& rng) {
    switch (rng() % 3) {
    case 0: return "@";
    case 1: return "-@";
    default: return "(" + random_formula(rng, 1 + static_cast<int>(rng() % 4)) + ")";
    }
}

}  // namespace lcr::testing
