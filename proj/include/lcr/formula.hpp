#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lcr {

enum class NodeKind { number, identifier, binary, negate };

struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Arithmetic expression tree. Binary nodes hold exactly two children,
/// negate nodes one, leaves none.
struct ExprNode {
    NodeKind kind = NodeKind::number;
    char op = 0;        // '+', '-', '*', '/' for binary nodes
    std::string token;  // literal text for number / identifier leaves
    std::vector<ExprNode> children;
    SourceSpan span;    // offsets into the sanitized input
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t position);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class MergeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Recursive-descent parse of
///   Expr   := Term (('+'|'-') Term)*
///   Term   := Factor (('*'|'/') Factor)*
///   Factor := Number | Identifier | '(' Expr ')' | '-' Factor
/// '$' and ',' are dropped before parsing; whitespace is ignored.
ExprNode parse_expression(std::string_view raw);

/// Prints with the minimal parentheses needed to re-parse into the same tree.
std::string to_string(const ExprNode& node);

/// Tree equality ignoring source spans.
bool structurally_equal(const ExprNode& a, const ExprNode& b);

/// Operator skeleton of a formula: every number / identifier becomes '@'.
struct AlignedFormula {
    std::string text;
    std::size_t token_count = 0;
    std::string origin;

    friend bool operator==(const AlignedFormula&, const AlignedFormula&) = default;
};

/// Aligns raw text token by token, keeping the author's parentheses.
/// Segments separated by ';' are aligned independently and re-joined.
AlignedFormula align_variables(std::string_view raw);
AlignedFormula align_variables(const ExprNode& expr);

/// Aligns each step and joins them with ';'. A single step reduces to
/// align_variables. Unparseable steps are skipped and counted in `dropped`.
AlignedFormula merge_steps(std::span<const std::string> steps, std::size_t& dropped);
AlignedFormula merge_steps(std::span<const std::string> steps);

/// One arithmetic step found in free text, e.g. "74 - 35 = 39".
struct FormulaStep {
    std::string expression;
    std::optional<double> result;
};

/// Applies the equation rules to one "a = b = c" chunk: a trailing bare
/// number is the result; the expression is the first operator-bearing
/// segment, preferring a purely numeric one. Returns nullopt when no segment
/// carries an operator or nothing parses.
std::optional<FormulaStep> step_from_equation(std::string_view chunk);

/// Scans model output for arithmetic steps. Lines that are entirely
/// formula-shaped (including identifiers) are taken whole; otherwise the
/// maximal numeric runs inside prose are used.
std::vector<FormulaStep> extract_steps(std::string_view text);

/// Folds steps into total formulas: a literal equal to an earlier step's
/// result is replaced by that step's parenthesized expression, consuming it.
/// Returns the unconsumed roots in order.
std::vector<std::string> chain_steps(std::span<const FormulaStep> steps);

}  // namespace lcr
