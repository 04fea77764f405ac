#include "lcr/formula.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include <spdlog/spdlog.h>

#include "lcr/numeric.hpp"

namespace lcr {

ParseError::ParseError(const std::string& msg, std::size_t position)
    : std::runtime_error(msg + " at position " + std::to_string(position)), position_(position) {}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_operator(char c) { return c == '+' || c == '-' || c == '*' || c == '/'; }

int precedence(char op) { return (op == '*' || op == '/') ? 2 : 1; }

// Input with '$' and ',' removed; raw_pos maps each kept char back to the
// caller's offset.
struct Sanitized {
    std::string text;
    std::vector<std::size_t> raw_pos;

    explicit Sanitized(std::string_view raw) {
        text.reserve(raw.size());
        raw_pos.reserve(raw.size() + 1);
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '$' || raw[i] == ',') continue;
            text.push_back(raw[i]);
            raw_pos.push_back(i);
        }
        raw_pos.push_back(raw.size());
    }

    std::size_t to_raw(std::size_t i) const { return raw_pos[std::min(i, raw_pos.size() - 1)]; }
};

enum class TokenKind { number, identifier, symbol };

struct Token {
    TokenKind kind;
    std::size_t begin;
    std::size_t end;
};

// Longest number starting at i: digits with an optional fraction, or a
// bare fraction like ".5". Returns i when no number starts there.
std::size_t scan_number(const std::string& s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j < s.size() && s[j] == '.' && j + 1 < s.size() && is_digit(s[j + 1])) {
        ++j;
        while (j < s.size() && is_digit(s[j])) ++j;
    }
    return j;
}

std::size_t scan_identifier(const std::string& s, std::size_t i) {
    if (i < s.size() && s[i] == '@') return i + 1;
    if (i >= s.size() || !is_ident_start(s[i])) return i;
    std::size_t j = i + 1;
    while (j < s.size() && is_ident_char(s[j])) ++j;
    return j;
}

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            ++i;
            continue;
        }
        if (std::size_t j = scan_number(s, i); j > i) {
            tokens.push_back({TokenKind::number, i, j});
            i = j;
        } else if (std::size_t k = scan_identifier(s, i); k > i) {
            tokens.push_back({TokenKind::identifier, i, k});
            i = k;
        } else {
            tokens.push_back({TokenKind::symbol, i, i + 1});
            ++i;
        }
    }
    return tokens;
}

class Parser {
public:
    explicit Parser(const Sanitized& input) : in_(input), s_(input.text) {}

    ExprNode parse() {
        skip_ws();
        if (pos_ >= s_.size()) fail("empty expression");
        ExprNode root = expr();
        skip_ws();
        if (pos_ < s_.size()) {
            if (s_[pos_] == ')') fail("unbalanced parenthesis");
            fail(std::string("unexpected '") + s_[pos_] + "'");
        }
        return root;
    }

private:
    const Sanitized& in_;
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, in_.to_raw(pos_)); }

    void skip_ws() {
        while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    static ExprNode make_binary(char op, ExprNode lhs, ExprNode rhs) {
        ExprNode node;
        node.kind = NodeKind::binary;
        node.op = op;
        node.span = {lhs.span.begin, rhs.span.end};
        node.children.reserve(2);
        node.children.push_back(std::move(lhs));
        node.children.push_back(std::move(rhs));
        return node;
    }

    ExprNode expr() {
        ExprNode lhs = term();
        for (char c = peek(); c == '+' || c == '-'; c = peek()) {
            ++pos_;
            lhs = make_binary(c, std::move(lhs), term());
        }
        return lhs;
    }

    ExprNode term() {
        ExprNode lhs = factor();
        for (char c = peek(); c == '*' || c == '/'; c = peek()) {
            ++pos_;
            lhs = make_binary(c, std::move(lhs), factor());
        }
        return lhs;
    }

    ExprNode factor() {
        const char c = peek();
        const std::size_t start = pos_;
        if (c == '\0') fail("dangling operator");
        if (c == '(') {
            ++pos_;
            if (peek() == ')') fail("empty parentheses");
            ExprNode inner = expr();
            if (peek() != ')') fail("unbalanced parenthesis");
            ++pos_;
            inner.span = {in_.to_raw(start), in_.to_raw(pos_ - 1) + 1};
            return inner;
        }
        if (c == '-') {
            ++pos_;
            ExprNode node;
            node.kind = NodeKind::negate;
            node.children.push_back(factor());
            node.span = {in_.to_raw(start), node.children.front().span.end};
            return node;
        }
        if (std::size_t end = scan_number(s_, pos_); end > pos_) {
            return leaf(NodeKind::number, end);
        }
        if (std::size_t end = scan_identifier(s_, pos_); end > pos_) {
            return leaf(NodeKind::identifier, end);
        }
        if (c == ')') fail("empty operand before ')'");
        if (is_operator(c)) fail("dangling operator");
        fail(std::string("unexpected '") + c + "'");
    }

    ExprNode leaf(NodeKind kind, std::size_t end) {
        ExprNode node;
        node.kind = kind;
        node.token = s_.substr(pos_, end - pos_);
        node.span = {in_.to_raw(pos_), in_.to_raw(end - 1) + 1};
        pos_ = end;
        return node;
    }
};

std::string trim_copy(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

bool has_identifier(const ExprNode& node) {
    if (node.kind == NodeKind::identifier) return true;
    return std::any_of(node.children.begin(), node.children.end(), has_identifier);
}

AlignedFormula align_segment(std::string_view raw) {
    Sanitized in(raw);
    Parser(in).parse();
    AlignedFormula out;
    for (const Token& t : lex(in.text)) {
        if (t.kind == TokenKind::symbol) {
            out.text.push_back(in.text[t.begin]);
        } else {
            out.text.push_back('@');
            ++out.token_count;
        }
    }
    return out;
}

}  // namespace

ExprNode parse_expression(std::string_view raw) {
    Sanitized in(raw);
    return Parser(in).parse();
}

std::string to_string(const ExprNode& node) {
    switch (node.kind) {
    case NodeKind::number:
    case NodeKind::identifier:
        return node.token;
    case NodeKind::negate: {
        const ExprNode& child = node.children.front();
        if (child.kind == NodeKind::binary) return "-(" + to_string(child) + ")";
        return "-" + to_string(child);
    }
    case NodeKind::binary: {
        const ExprNode& l = node.children[0];
        const ExprNode& r = node.children[1];
        std::string left = to_string(l);
        std::string right = to_string(r);
        if (l.kind == NodeKind::binary && precedence(l.op) < precedence(node.op)) left = "(" + left + ")";
        if (r.kind == NodeKind::binary && precedence(r.op) <= precedence(node.op)) right = "(" + right + ")";
        return left + node.op + right;
    }
    }
    return {};
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind || a.op != b.op || a.token != b.token || a.children.size() != b.children.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!structurally_equal(a.children[i], b.children[i])) return false;
    }
    return true;
}

AlignedFormula align_variables(std::string_view raw) {
    AlignedFormula out;
    bool first = true;
    for (std::string_view segment : split(raw, ';')) {
        AlignedFormula part = align_segment(segment);
        if (!first) out.text.push_back(';');
        out.text += part.text;
        out.token_count += part.token_count;
        first = false;
    }
    out.origin = std::string(raw);
    return out;
}

AlignedFormula align_variables(const ExprNode& expr) {
    AlignedFormula out = align_segment(to_string(expr));
    out.origin = to_string(expr);
    return out;
}

AlignedFormula merge_steps(std::span<const std::string> steps, std::size_t& dropped) {
    dropped = 0;
    std::vector<AlignedFormula> parts;
    for (const std::string& step : steps) {
        try {
            parts.push_back(align_variables(step));
        } catch (const ParseError& e) {
            ++dropped;
            spdlog::debug("dropping unparseable step '{}': {}", step, e.what());
        }
    }
    if (dropped > 0) spdlog::warn("merge_steps dropped {} of {} steps", dropped, steps.size());
    if (parts.empty()) {
        throw MergeError(steps.empty() ? "no steps to merge" : "every step failed to parse");
    }
    if (parts.size() == 1) return parts.front();

    AlignedFormula merged;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            merged.text.push_back(';');
            merged.origin.push_back(';');
        }
        merged.text += parts[i].text;
        merged.origin += parts[i].origin;
        merged.token_count += parts[i].token_count;
    }
    return merged;
}

AlignedFormula merge_steps(std::span<const std::string> steps) {
    std::size_t dropped = 0;
    return merge_steps(steps, dropped);
}

std::optional<FormulaStep> step_from_equation(std::string_view chunk) {
    std::vector<std::string> segments;
    for (std::string_view part : split(chunk, '=')) segments.push_back(trim_copy(part));
    std::erase_if(segments, [](const std::string& s) { return s.empty(); });
    if (segments.empty()) return std::nullopt;

    FormulaStep step;
    if (segments.size() >= 2) {
        if (auto value = parse_decimal(segments.back())) {
            step.result = value;
            segments.pop_back();
        }
    }

    std::optional<std::string> symbolic;
    for (const std::string& seg : segments) {
        ExprNode tree;
        try {
            tree = parse_expression(seg);
        } catch (const ParseError&) {
            continue;
        }
        if (tree.kind != NodeKind::binary) continue;
        if (!has_identifier(tree)) {
            step.expression = seg;
            return step;
        }
        if (!symbolic) symbolic = seg;
    }
    if (!symbolic) return std::nullopt;
    step.expression = *symbolic;
    return step;
}

namespace {

// Rewrites typeset math into plain operators: \times -> *, \div -> /,
// \text{...} groups (units) dropped, \$ -> $.
std::string normalize_math_markup(std::string_view text) {
    std::string s(text);
    auto replace_all = [&s](std::string_view from, std::string_view to) {
        for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
            s.replace(p, from.size(), to);
        }
    };
    static const std::regex text_group(R"(\\(?:text|mathrm)\{[^}]*\})");
    s = std::regex_replace(s, text_group, " ");
    replace_all("\\times", "*");
    replace_all("\\cdot", "*");
    replace_all("\\div", "/");
    replace_all("\\$", "$");
    replace_all("\xC3\x97", "*");      // U+00D7
    replace_all("\xC3\xB7", "/");      // U+00F7
    replace_all("\xE2\x88\x92", "-");  // U+2212
    return s;
}

bool run_char(std::string_view line, std::size_t i) {
    const char c = line[i];
    if (is_digit(c) || is_operator(c) || c == '(' || c == ')' || c == '=' || c == '$' || c == ' ' || c == '\t') {
        return true;
    }
    const bool digit_before = i > 0 && is_digit(line[i - 1]);
    const bool digit_after = i + 1 < line.size() && is_digit(line[i + 1]);
    if (c == '.') return digit_after;
    // thousands separator: digit ',' ddd (non-digit)
    if (c == ',' && digit_before && i + 3 < line.size() && is_digit(line[i + 1]) && is_digit(line[i + 2]) &&
        is_digit(line[i + 3])) {
        return i + 4 >= line.size() || !is_digit(line[i + 4]);
    }
    return false;
}

std::string strip_run(std::string_view run) {
    std::string s = trim_copy(run);
    while (!s.empty() && (s.front() == '=' || s.front() == '+' || s.front() == '*' || s.front() == '/' ||
                          s.front() == ')')) {
        s.erase(s.begin());
        s = trim_copy(s);
    }
    while (!s.empty() && (s.back() == '=' || is_operator(s.back()) || s.back() == '(')) {
        s.pop_back();
        s = trim_copy(s);
    }
    return s;
}

std::string strip_list_marker(const std::string& line) {
    static const std::regex marker(R"(^\s*(?:[-*•]\s+|\d+[.)]\s+|step\s*\d+\s*[:.)]\s*))", std::regex::icase);
    return std::regex_replace(line, marker, "", std::regex_constants::format_first_only);
}

void collect_runs(std::string_view line, std::vector<FormulaStep>& out) {
    std::size_t i = 0;
    while (i < line.size()) {
        if (!run_char(line, i) || (line[i] == ' ' || line[i] == '\t')) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && run_char(line, j)) ++j;
        // A run glued to a word ("t-shirt", "x2") is prose, not arithmetic.
        const bool glued_left = i > 0 && is_ident_char(line[i - 1]);
        std::string_view run = line.substr(i, j - i);
        if (glued_left) {
            std::size_t skip = 0;
            while (skip < run.size() && !is_space(run[skip])) ++skip;
            run = run.substr(skip);
        }
        if (j < line.size() && is_ident_char(line[j])) {
            std::size_t cut = run.size();
            while (cut > 0 && !is_space(run[cut - 1])) --cut;
            run = run.substr(0, cut);
        }
        if (std::string cleaned = strip_run(run); !cleaned.empty()) {
            if (auto step = step_from_equation(cleaned)) out.push_back(std::move(*step));
        }
        i = j;
    }
}

}  // namespace

std::vector<FormulaStep> extract_steps(std::string_view text) {
    std::vector<FormulaStep> steps;
    const std::string normalized = normalize_math_markup(text);
    for (std::string_view raw_line : split(normalized, '\n')) {
        std::string line = strip_list_marker(std::string(raw_line));
        line = trim_copy(line);
        if (line.empty()) continue;

        bool whole_line = true;
        for (std::string_view seg : split(line, '=')) {
            if (trim_copy(seg).empty()) continue;
            try {
                parse_expression(seg);
            } catch (const ParseError&) {
                whole_line = false;
                break;
            }
        }
        if (whole_line) {
            if (auto step = step_from_equation(line)) steps.push_back(std::move(*step));
            continue;
        }
        collect_runs(line, steps);
    }
    return steps;
}

std::vector<std::string> chain_steps(std::span<const FormulaStep> steps) {
    std::vector<std::string> rebuilt;
    std::vector<bool> consumed(steps.size(), false);
    rebuilt.reserve(steps.size());

    for (std::size_t i = 0; i < steps.size(); ++i) {
        Sanitized in(steps[i].expression);
        std::string out;
        std::size_t cursor = 0;
        for (const Token& t : lex(in.text)) {
            if (t.kind != TokenKind::number) continue;
            const auto value = parse_decimal(std::string_view(in.text).substr(t.begin, t.end - t.begin));
            if (!value) continue;
            for (std::size_t j = i; j-- > 0;) {
                if (consumed[j] || !steps[j].result || !answers_match(*value, *steps[j].result)) continue;
                out += in.text.substr(cursor, t.begin - cursor);
                out += "(" + rebuilt[j] + ")";
                cursor = t.end;
                consumed[j] = true;
                break;
            }
        }
        out += in.text.substr(cursor);
        rebuilt.push_back(trim_copy(out));
    }

    std::vector<std::string> roots;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!consumed[i]) roots.push_back(rebuilt[i]);
    }
    return roots;
}

}  // namespace lcr
