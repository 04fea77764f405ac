#include "lcr/similarity.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <vector>

#include <spdlog/spdlog.h>

namespace lcr {

void SimilarityConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (!(dedup_threshold >= 0.0)) throw ConfigError("dedup threshold must be non-negative");
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    while (!a.empty() && !b.empty() && a.front() == b.front()) {
        a.remove_prefix(1);
        b.remove_prefix(1);
    }
    while (!a.empty() && !b.empty() && a.back() == b.back()) {
        a.remove_suffix(1);
        b.remove_suffix(1);
    }
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();
    std::array<std::size_t, 64> small;
    std::vector<std::size_t> large;
    std::size_t* row = small.data();
    if (b.size() >= small.size()) {
        large.resize(b.size() + 1);
        row = large.data();
    }
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        const char ca = a[i - 1];
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t subst = diag + (ca == b[j - 1] ? 0 : 1);
            row[j] = std::min(std::min(up, row[j - 1]) + 1, subst);
            diag = up;
        }
    }
    return row[b.size()];
}

double norm_distance(std::string_view a, std::string_view b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) {
        spdlog::warn("norm_distance: both formulas empty, treating as identical");
        return 0.0;
    }
    const auto forward = static_cast<double>(levenshtein(a, b));
    const auto backward = static_cast<double>(levenshtein(b, a));
    return (forward + backward) / static_cast<double>(total);
}

namespace {

int precedence(char op) { return (op == '*' || op == '/') ? 2 : 1; }

bool is_binary_position(std::string_view s, std::size_t i) {
    if (i == 0) return false;
    const char prev = s[i - 1];
    return prev == '@' || prev == ')' || std::isalnum(static_cast<unsigned char>(prev)) || prev == '_' ||
           prev == '.';
}

}  // namespace

SplitResult split_balanced(std::string_view aligned) {
    SplitResult best;
    std::size_t best_pos = 0;
    long best_diff = 0;
    int depth = 0;
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        const char c = aligned[i];
        if (c == '(') {
            ++depth;
            continue;
        }
        if (c == ')') {
            --depth;
            continue;
        }
        if (depth != 0 || !(c == '+' || c == '-' || c == '*' || c == '/')) continue;
        if (c == '-' && !is_binary_position(aligned, i)) continue;
        if (i + 1 >= aligned.size()) continue;

        const long left = static_cast<long>(i);
        const long right = static_cast<long>(aligned.size() - i - 1);
        const long diff = std::labs(left - right);
        const bool better = !best.op || diff < best_diff ||
                            (diff == best_diff && precedence(c) < precedence(*best.op));
        if (better) {
            best.op = c;
            best_pos = i;
            best_diff = diff;
        }
    }
    if (best.op) {
        best.left = std::string(aligned.substr(0, best_pos));
        best.right = std::string(aligned.substr(best_pos + 1));
    }
    return best;
}

double tree_distance(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) throw DegenerateInput("tree_distance: empty formula");
    const SplitResult sa = split_balanced(a);
    const SplitResult sb = split_balanced(b);
    if (!sa.op || !sb.op) return 2.0 * norm_distance(a, b);

    const double in_order = norm_distance(sa.left, sb.left) + norm_distance(sa.right, sb.right);
    if (*sa.op == '+' || *sa.op == '*') {
        const double swapped = norm_distance(sa.left, sb.right) + norm_distance(sa.right, sb.left);
        return std::min(in_order, swapped);
    }
    return in_order;
}

double logic_similarity(std::string_view a, std::string_view b) {
    return 1.0 - std::min(tree_distance(a, b), 2.0) / 2.0;
}

double tls(const ProblemKey& a, const ProblemKey& b, const SimilarityConfig& cfg, SemanticProvider& sem) {
    double score = 0.0;
    if (cfg.alpha > 0.0) score += cfg.alpha * logic_similarity(a.formula, b.formula);
    if (cfg.alpha < 1.0) {
        const double s = std::clamp(sem.similarity(a.question, b.question), 0.0, 1.0);
        score += (1.0 - cfg.alpha) * s;
    }
    return std::clamp(score, 0.0, 1.0);
}

}  // namespace lcr
