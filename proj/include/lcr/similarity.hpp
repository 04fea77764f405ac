#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace lcr {

class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ZeroVector : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SimilarityConfig {
    double alpha = 0.7;             // weight of the logic term
    double dedup_threshold = 0.9;   // corpus entries scoring above this are duplicates

    /// Throws ConfigError when alpha leaves [0,1] or the threshold is negative.
    void validate() const;
};

/// Unit-cost insert/delete/substitute edit distance.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// (Lev(a,b) + Lev(b,a)) / (len a + len b). Two empty strings give 0 (logged).
double norm_distance(std::string_view a, std::string_view b);

/// Split of an aligned formula at one depth-0 binary operator.
struct SplitResult {
    std::optional<char> op;
    std::string left;
    std::string right;
};

/// Picks the depth-0 binary operator giving the most even branch lengths.
/// Ties go to the lower-precedence operator, then the leftmost. Unary '-'
/// (at the start, after '(' or after another operator) is never a split point.
SplitResult split_balanced(std::string_view aligned);

/// One-level split distance: branches compared with norm_distance, in both
/// pairings when the first formula splits at '+' or '*'. Falls back to
/// 2 * norm_distance when either side has no depth-0 operator.
double tree_distance(std::string_view a, std::string_view b);

/// 1 - min(tree_distance, 2) / 2.
double logic_similarity(std::string_view a, std::string_view b);

/// Similarity of two question texts, in [-1, 1]. Implementations must be
/// safe to call concurrently.
class SemanticProvider {
public:
    virtual ~SemanticProvider() = default;
    virtual double similarity(std::string_view q1, std::string_view q2) = 0;
};

/// A problem as seen by retrieval: its question and aligned formula. An
/// empty formula means "unknown" and is only legal with alpha = 0.
struct ProblemKey {
    std::string_view question;
    std::string_view formula;
};

/// alpha * logic_similarity + (1 - alpha) * clamp(sem, 0, 1). Terms with a
/// zero weight are not evaluated.
double tls(const ProblemKey& a, const ProblemKey& b, const SimilarityConfig& cfg, SemanticProvider& sem);

/// Cosine similarity of two dense vectors of the same scalar type.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
    using Scalar = typename DerivedA::Scalar;
    if (u.size() != v.size()) {
        throw DimensionMismatch("cosine: dimensions " + std::to_string(u.size()) + " and " +
                                std::to_string(v.size()));
    }
    const Scalar nu = u.norm();
    const Scalar nv = v.norm();
    if (nu == Scalar(0) || nv == Scalar(0)) throw ZeroVector("cosine: zero vector");
    const Scalar c = u.dot(v) / (nu * nv);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

}  // namespace lcr
