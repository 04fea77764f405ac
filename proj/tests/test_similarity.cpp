#include <gtest/gtest.h>

#include <Eigen/Core>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "lcr/semantic.hpp"
#include "lcr/similarity.hpp"
#include "oracles.hpp"

using namespace lcr;
using lcr::testing::lev_oracle;
using lcr::testing::norm_oracle;

namespace {

class FixedSemantic : public SemanticProvider {
public:
    explicit FixedSemantic(double v) : value(v) {}
    double similarity(std::string_view, std::string_view) override {
        ++calls;
        return value;
    }
    double value;
    int calls = 0;
};

std::string random_string(std::mt19937_64& rng, std::size_t max_len) {
    static const char alphabet[] = {'@', '+', '*', '(', ')'};
    std::string s(rng() % (max_len + 1), ' ');
    for (char& c : s) c = alphabet[rng() % 5];
    return s;
}

// Candidates enumerated separately, then ranked by (imbalance, precedence, position).
std::tuple<char, std::string, std::string> split_oracle(const std::string& s) {
    std::vector<std::tuple<long, int, std::size_t>> cands;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        depth += (c == '(') - (c == ')');
        if (depth != 0 || std::string("+-*/").find(c) == std::string::npos) continue;
        if (i == 0 || i + 1 == s.size()) continue;
        if (c == '-' && std::string("(+-*/").find(s[i - 1]) != std::string::npos) continue;
        const long imbalance = std::labs(static_cast<long>(i) - static_cast<long>(s.size() - i - 1));
        cands.emplace_back(imbalance, (c == '+' || c == '-') ? 0 : 1, i);
    }
    if (cands.empty()) return {'\0', "", ""};
    const auto best = *std::min_element(cands.begin(), cands.end());
    const std::size_t p = std::get<2>(best);
    return {s[p], s.substr(0, p), s.substr(p + 1)};
}

double td_oracle(const std::string& a, const std::string& b) {
    const auto [oa, a1, a2] = split_oracle(a);
    const auto [ob, b1, b2] = split_oracle(b);
    if (!oa || !ob) return 2 * norm_oracle(a, b);
    const double straight = norm_oracle(a1, b1) + norm_oracle(a2, b2);
    if (oa == '+' || oa == '*') return std::min(straight, norm_oracle(a1, b2) + norm_oracle(a2, b1));
    return straight;
}

}  // namespace

TEST(Levenshtein, Examples) {
    EXPECT_EQ(levenshtein("@+@", "@+@"), 0u);
    EXPECT_EQ(levenshtein("@+@", "@*@"), 1u);
    EXPECT_EQ(levenshtein("", "@*@"), 3u);
    EXPECT_EQ(levenshtein("@*(@+@+@)*@", "@*(@+@)*@"), lev_oracle("@*(@+@+@)*@", "@*(@+@)*@"));
}

TEST(Levenshtein, MatchesOracleOnRandomPairs) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) {
        const std::string a = random_string(rng, 8);
        const std::string b = random_string(rng, 8);
        ASSERT_EQ(levenshtein(a, b), lev_oracle(a, b)) << a << " / " << b;
    }
}

TEST(Levenshtein, SymmetryAndTriangle) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const std::string a = random_string(rng, 12);
        const std::string b = random_string(rng, 12);
        const std::string c = random_string(rng, 12);
        EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
        EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
    }
}

TEST(NormDistance, Examples) {
    EXPECT_DOUBLE_EQ(norm_distance("@*(@+@+@)*@", "@*(@+@)*@"), norm_oracle("@*(@+@+@)*@", "@*(@+@)*@"));
    EXPECT_DOUBLE_EQ(norm_distance("@*(@+@+@)*@", "@*(@+@)*@"), 0.2);
    EXPECT_EQ(norm_distance("@+@", "@+@"), 0.0);
    EXPECT_DOUBLE_EQ(norm_distance("@+@", "@*@"), 1.0 / 3.0);
    EXPECT_EQ(norm_distance("", ""), 0.0);
}

TEST(NormDistance, BoundedByTwo) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        const std::string a = random_string(rng, 12);
        const std::string b = random_string(rng, 12);
        if (a.empty() && b.empty()) continue;
        const double n = norm_distance(a, b);
        EXPECT_GE(n, 0.0);
        EXPECT_LE(n, 2.0);
        EXPECT_EQ(n, norm_distance(b, a));
    }
}

TEST(Split, Examples) {
    SplitResult s = split_balanced("@*@+@");
    ASSERT_TRUE(s.op);
    EXPECT_EQ(*s.op, '+');
    EXPECT_EQ(s.left, "@*@");
    EXPECT_EQ(s.right, "@");

    EXPECT_FALSE(split_balanced("(@+@)").op);
    EXPECT_FALSE(split_balanced("@").op);
    EXPECT_FALSE(split_balanced("-@").op);

    s = split_balanced("@+@+@+@");
    EXPECT_EQ(*s.op, '+');
    EXPECT_EQ(s.left, "@+@");
    EXPECT_EQ(s.right, "@+@");
}

TEST(Split, UnaryMinusIsNotASplitPoint) {
    const SplitResult s = split_balanced("@*-@");
    ASSERT_TRUE(s.op);
    EXPECT_EQ(*s.op, '*');
    EXPECT_EQ(s.right, "-@");
}

TEST(Split, ReconstructsInputAndMatchesOracle) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const std::string f = lcr::testing::random_formula(rng, static_cast<int>(rng() % 6));
        const SplitResult s = split_balanced(f);
        const auto [op, l, r] = split_oracle(f);
        ASSERT_EQ(s.op.value_or('\0'), op) << f;
        if (s.op) {
            EXPECT_EQ(s.left + *s.op + s.right, f);
            EXPECT_EQ(s.left, l);
            EXPECT_EQ(s.right, r);
        }
    }
}

TEST(TreeDistance, Examples) {
    EXPECT_EQ(tree_distance("@*@+@", "@+@*@"), 0.0);
    EXPECT_DOUBLE_EQ(tree_distance("@-@*@", "@*@-@"), td_oracle("@-@*@", "@*@-@"));
    EXPECT_DOUBLE_EQ(tree_distance("@-@*@", "@*@-@"), 2.0);
    EXPECT_EQ(tree_distance("@+@", "@+@"), 0.0);
    EXPECT_DOUBLE_EQ(tree_distance("@*(@+@+@)*@", "@*(@+@)*@"), td_oracle("@*(@+@+@)*@", "@*(@+@)*@"));
}

TEST(TreeDistance, FallbackWithoutOperator) {
    EXPECT_DOUBLE_EQ(tree_distance("@", "@+@"), 2.0 * norm_distance("@", "@+@"));
    EXPECT_DOUBLE_EQ(tree_distance("(@+@)", "@+@"), 2.0 * norm_distance("(@+@)", "@+@"));
}

TEST(TreeDistance, CommutativityFollowsFirstOperator) {
    // '+' on the left allows the swap even though the right splits at '-'.
    EXPECT_DOUBLE_EQ(tree_distance("@*@+@", "@-@*@"), td_oracle("@*@+@", "@-@*@"));
    EXPECT_GT(tree_distance("@-@*@", "@*@+@"), 0.0);
}

TEST(TreeDistance, EmptyOperandIsDegenerate) {
    EXPECT_THROW(tree_distance("", "@"), DegenerateInput);
    EXPECT_THROW(tree_distance("@", ""), DegenerateInput);
}

TEST(TreeDistance, MatchesOracleOnRandomFormulas) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 500; ++i) {
        const std::string a = lcr::testing::random_formula(rng, static_cast<int>(rng() % 5));
        const std::string b = lcr::testing::random_formula(rng, static_cast<int>(rng() % 5));
        ASSERT_DOUBLE_EQ(tree_distance(a, b), td_oracle(a, b)) << a << " / " << b;
    }
}

TEST(TreeDistance, CommutativeInterchange) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        const std::string l = lcr::testing::random_branch(rng);
        const std::string r = lcr::testing::random_branch(rng);
        const char op = (rng() % 2) ? '+' : '*';
        EXPECT_EQ(tree_distance(l + op + r, r + op + l), 0.0) << l << op << r;
    }
}

TEST(TreeDistance, BalanceFirstSplitBreaksLooseInterchange) {
    // Branch "@+@*@" has depth-0 operators, so the balanced split of
    // "@+@*@" + "@" lands inside it and the interchange no longer cancels.
    const double td = tree_distance("@+@*@+@", "@+@+@*@");
    EXPECT_DOUBLE_EQ(td, td_oracle("@+@*@+@", "@+@+@*@"));
    EXPECT_NEAR(td, 1.0 / 3.0, 1e-12);
    EXPECT_GT(tree_distance("@/@*@", "@*@/@"), 0.0);
}

TEST(TreeDistance, OrderSensitiveForSubtraction) { EXPECT_GT(tree_distance("@-@*@", "@*@-@"), 0.0); }

TEST(LogicSimilarity, Examples) {
    EXPECT_EQ(logic_similarity("@+@", "@+@"), 1.0);
    EXPECT_EQ(logic_similarity("@-@*@", "@*@-@"), 0.0);
    EXPECT_EQ(logic_similarity("@*@+@", "@+@*@"), 1.0);
    EXPECT_DOUBLE_EQ(logic_similarity("@*(@+@+@)*@", "@*(@+@)*@"), 1.0 - td_oracle("@*(@+@+@)*@", "@*(@+@)*@") / 2);
}

TEST(Tls, Examples) {
    SimilarityConfig cfg;
    FixedSemantic one(1.0);
    EXPECT_DOUBLE_EQ(tls({"q", "@+@"}, {"q", "@+@"}, cfg, one), 1.0);

    // logic similarity 0.5: TD = 1.
    const std::string a = "@+@";
    const std::string b = "@*@*@";
    ASSERT_DOUBLE_EQ(logic_similarity(a, b), 0.5);
    FixedSemantic sem(0.8);
    EXPECT_NEAR(tls({"q1", a}, {"q2", b}, cfg, sem), 0.59, 1e-12);

    FixedSemantic zero(0.0);
    EXPECT_EQ(tls({"q1", "@-@*@"}, {"q2", "@*@-@"}, cfg, zero), 0.0);
}

TEST(Tls, ClampsNegativeSemantic) {
    SimilarityConfig cfg;
    cfg.alpha = 0.0;
    FixedSemantic neg(-0.7);
    EXPECT_EQ(tls({"a", "@"}, {"b", "@"}, cfg, neg), 0.0);
}

TEST(Tls, ZeroWeightTermsSkipped) {
    SimilarityConfig cfg;
    cfg.alpha = 1.0;
    FixedSemantic sem(0.3);
    EXPECT_EQ(tls({"a", "@+@"}, {"b", "@+@"}, cfg, sem), 1.0);
    EXPECT_EQ(sem.calls, 0);
    cfg.alpha = 0.0;
    EXPECT_DOUBLE_EQ(tls({"a", ""}, {"b", "@+@"}, cfg, sem), 0.3);
}

TEST(Tls, ScaleInvariantEmbeddings) {
    std::map<std::string, Eigen::VectorXd, std::less<>> t1, t2;
    Eigen::VectorXd u(3), v(3);
    u << 1, 2, 3;
    v << 3, 1, 0.5;
    t1["a"] = u;
    t1["b"] = v;
    t2["a"] = 7.5 * u;
    t2["b"] = 7.5 * v;
    EmbeddingSimilarity s1(std::make_shared<TableEmbedder>(t1));
    EmbeddingSimilarity s2(std::make_shared<TableEmbedder>(t2));
    SimilarityConfig cfg;
    EXPECT_NEAR(tls({"a", "@+@"}, {"b", "@*@"}, cfg, s1), tls({"a", "@+@"}, {"b", "@*@"}, cfg, s2), 1e-12);
}

TEST(Config, Validation) {
    SimilarityConfig cfg;
    EXPECT_EQ(cfg.alpha, 0.7);
    EXPECT_NO_THROW(cfg.validate());
    cfg.alpha = 1.2;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.alpha = -0.1;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Cosine, Examples) {
    Eigen::Vector3d v(1, 2, 3);
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
    EXPECT_EQ(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 0.0);
    const double expected = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
    EXPECT_NEAR(cosine(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(4, 5, 6)), expected, 1e-12);
    EXPECT_NEAR(cosine(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(4, 5, 6)), 0.9746, 1e-4);
}

TEST(Cosine, FloatAndErrors) {
    Eigen::VectorXf a(2), b(3);
    a << 1, 1;
    b << 1, 1, 1;
    EXPECT_FLOAT_EQ(cosine(a, a), 1.0f);
    EXPECT_THROW(cosine(a, b), DimensionMismatch);
    EXPECT_THROW(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), ZeroVector);
}
