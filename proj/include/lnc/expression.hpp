#pragma once

// Expressions for fields and candidate functions.
// Grammar (precedence ^ > unary - > * / > + -; ^ right associative, the rest left associative):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | function '(' expr ')' | '(' expr ')'
// Variables are t, x, y, z (axes 0..3); functions are sin cos exp sqrt tanh abs.

#include "lnc/format.hpp"
#include "lnc/lattice.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lnc {

enum class Func { sin, cos, exp, sqrt, tanh, abs };

inline constexpr std::array<std::string_view, 6> kFunctionNames{"sin", "cos", "exp", "sqrt", "tanh", "abs"};
inline constexpr std::array<std::string_view, 4> kVariableNames{"t", "x", "y", "z"};

inline std::string_view to_string(Func f) { return kFunctionNames[static_cast<std::size_t>(f)]; }

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { constant, variable, negate, add, sub, mul, div, pow, call };
    Kind kind = Kind::constant;
    double value = 0.0;  ///< constant
    int axis = 0;        ///< variable
    Func func = Func::sin;
    ExprPtr lhs, rhs;  ///< operands (unary and call use lhs)
};

inline ExprPtr make_constant(double v) { return std::make_shared<Expr>(Expr{Expr::Kind::constant, v}); }
inline ExprPtr make_variable(int axis) {
    return std::make_shared<Expr>(Expr{Expr::Kind::variable, 0.0, axis});
}
inline ExprPtr make_unary(Expr::Kind k, ExprPtr a, Func f = Func::sin) {
    return std::make_shared<Expr>(Expr{k, 0.0, 0, f, std::move(a), nullptr});
}
inline ExprPtr make_binary(Expr::Kind k, ExprPtr a, ExprPtr b) {
    return std::make_shared<Expr>(Expr{k, 0.0, 0, Func::sin, std::move(a), std::move(b)});
}

/// Structural equality (constants compared exactly).
inline bool same_ast(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::constant: return a->value == b->value;
        case Expr::Kind::variable: return a->axis == b->axis;
        case Expr::Kind::negate: return same_ast(a->lhs, b->lhs);
        case Expr::Kind::call: return a->func == b->func && same_ast(a->lhs, b->lhs);
        default: return same_ast(a->lhs, b->lhs) && same_ast(a->rhs, b->rhs);
    }
}

/// Highest axis index referenced, or -1 for a constant expression.
inline int max_axis(const ExprPtr& e) {
    if (!e) return -1;
    if (e->kind == Expr::Kind::variable) return e->axis;
    return std::max(max_axis(e->lhs), max_axis(e->rhs));
}

// ---------------------------------------------------------------------------------------------
// Parsing

class ParseError : public std::invalid_argument {
public:
    enum class Kind { unexpected_token, unknown_identifier, unbalanced_parens, arity_mismatch, bad_number, empty };

    ParseError(Kind kind, int line, int column, const std::string& msg)
        : std::invalid_argument("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                                ": " + msg),
          kind_(kind),
          line_(line),
          column_(column) {}

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

private:
    Kind kind_;
    int line_, column_;
};

namespace detail {

struct Token {
    enum class Kind { number, ident, op, lparen, rparen, comma, end };
    Kind kind = Kind::end;
    std::string text;
    double number = 0.0;
    int line = 1, column = 1;
};

inline std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = col;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                    while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                    j = k;
                }
            }
            tok.kind = Token::Kind::number;
            tok.text = std::string(s.substr(i, j - i));
            const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
            if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size())
                throw ParseError(ParseError::Kind::bad_number, line, col, "malformed number '" + tok.text + "'");
            advance(j - i);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            tok.kind = Token::Kind::ident;
            tok.text = std::string(s.substr(i, j - i));
            advance(j - i);
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            tok.kind = Token::Kind::op;
            tok.text = std::string(1, c);
            advance(1);
        } else if (c == '(' || c == ')' || c == ',') {
            tok.kind = c == '(' ? Token::Kind::lparen : c == ')' ? Token::Kind::rparen : Token::Kind::comma;
            tok.text = std::string(1, c);
            advance(1);
        } else {
            throw ParseError(ParseError::Kind::unexpected_token, line, col, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ExprPtr parse() {
        if (peek().kind == Token::Kind::end)
            throw ParseError(ParseError::Kind::empty, peek().line, peek().column, "empty expression");
        auto e = expr();
        const auto& t = peek();
        if (t.kind == Token::Kind::rparen)
            throw ParseError(ParseError::Kind::unbalanced_parens, t.line, t.column, "unmatched ')'");
        if (t.kind != Token::Kind::end) unexpected(t);
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<const Token*> open_;

    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }
    bool is_op(char c) const { return peek().kind == Token::Kind::op && peek().text[0] == c; }

    [[noreturn]] void unexpected(const Token& t) const {
        if (t.kind == Token::Kind::end) {
            if (!open_.empty())
                throw ParseError(ParseError::Kind::unbalanced_parens, open_.back()->line, open_.back()->column,
                                 "unclosed '('");
            throw ParseError(ParseError::Kind::unexpected_token, t.line, t.column, "unexpected end of input");
        }
        throw ParseError(ParseError::Kind::unexpected_token, t.line, t.column, "unexpected '" + t.text + "'");
    }

    ExprPtr expr() {
        auto e = term();
        while (is_op('+') || is_op('-')) {
            const auto k = take().text[0] == '+' ? Expr::Kind::add : Expr::Kind::sub;
            e = make_binary(k, e, term());
        }
        return e;
    }

    ExprPtr term() {
        auto e = unary();
        while (is_op('*') || is_op('/')) {
            const auto k = take().text[0] == '*' ? Expr::Kind::mul : Expr::Kind::div;
            e = make_binary(k, e, unary());
        }
        return e;
    }

    ExprPtr unary() {
        if (is_op('-')) {
            take();
            return make_unary(Expr::Kind::negate, unary());
        }
        return power();
    }

    ExprPtr power() {
        auto base = primary();
        if (is_op('^')) {
            take();
            return make_binary(Expr::Kind::pow, base, unary());
        }
        return base;
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::number: take(); return make_constant(t.number);
            case Token::Kind::lparen: {
                open_.push_back(&take());
                auto e = expr();
                close();
                return e;
            }
            case Token::Kind::ident: {
                take();
                for (std::size_t v = 0; v < kVariableNames.size(); ++v)
                    if (t.text == kVariableNames[v]) {
                        if (peek().kind == Token::Kind::lparen)
                            throw ParseError(ParseError::Kind::unexpected_token, peek().line, peek().column,
                                             "variable '" + t.text + "' is not a function");
                        return make_variable(static_cast<int>(v));
                    }
                for (std::size_t f = 0; f < kFunctionNames.size(); ++f)
                    if (t.text == kFunctionNames[f]) return call(t, static_cast<Func>(f));
                throw ParseError(ParseError::Kind::unknown_identifier, t.line, t.column,
                                 "unknown identifier '" + t.text + "'");
            }
            default: unexpected(t);
        }
    }

    ExprPtr call(const Token& name, Func f) {
        if (peek().kind != Token::Kind::lparen)
            throw ParseError(ParseError::Kind::arity_mismatch, name.line, name.column,
                             "function '" + name.text + "' expects 1 argument in parentheses");
        open_.push_back(&take());
        if (peek().kind == Token::Kind::rparen)
            throw ParseError(ParseError::Kind::arity_mismatch, name.line, name.column,
                             "function '" + name.text + "' expects 1 argument, got 0");
        auto arg = expr();
        if (peek().kind == Token::Kind::comma) {
            int count = 1;
            while (peek().kind == Token::Kind::comma) {
                take();
                expr();
                ++count;
            }
            throw ParseError(ParseError::Kind::arity_mismatch, name.line, name.column,
                             "function '" + name.text + "' expects 1 argument, got " + std::to_string(count));
        }
        close();
        return make_unary(Expr::Kind::call, arg, f);
    }

    void close() {
        if (peek().kind != Token::Kind::rparen) {
            if (peek().kind == Token::Kind::end)
                throw ParseError(ParseError::Kind::unbalanced_parens, open_.back()->line, open_.back()->column,
                                 "unclosed '('");
            unexpected(peek());
        }
        take();
        open_.pop_back();
    }
};

}  // namespace detail

inline ExprPtr parse_expression(std::string_view text) { return detail::Parser(detail::tokenize(text)).parse(); }

// ---------------------------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::add:
        case Expr::Kind::sub: return 1;
        case Expr::Kind::mul:
        case Expr::Kind::div: return 2;
        case Expr::Kind::negate: return 3;
        case Expr::Kind::pow: return 4;
        default: return 5;
    }
}

inline std::string wrap(const ExprPtr& e, bool parens);

}  // namespace detail

/// Minimal-parenthesis text that reparses to an identical AST; constants use shortest round-trip form.
inline std::string to_string(const ExprPtr& e) {
    using detail::precedence;
    using detail::wrap;
    switch (e->kind) {
        case Expr::Kind::constant: return format_double(e->value);
        case Expr::Kind::variable: return std::string(kVariableNames[static_cast<std::size_t>(e->axis)]);
        case Expr::Kind::negate: return "-" + wrap(e->lhs, precedence(*e->lhs) < 3);
        case Expr::Kind::call: return std::string(to_string(e->func)) + "(" + to_string(e->lhs) + ")";
        case Expr::Kind::pow: return wrap(e->lhs, precedence(*e->lhs) <= 4) + "^" + wrap(e->rhs, precedence(*e->rhs) < 3);
        default: {
            const int p = precedence(*e);
            const char* op = e->kind == Expr::Kind::add   ? " + "
                             : e->kind == Expr::Kind::sub ? " - "
                             : e->kind == Expr::Kind::mul ? "*"
                                                          : "/";
            return wrap(e->lhs, precedence(*e->lhs) < p) + op + wrap(e->rhs, precedence(*e->rhs) <= p);
        }
    }
}

inline std::string detail::wrap(const ExprPtr& e, bool parens) {
    return parens ? "(" + to_string(e) + ")" : to_string(e);
}

// ---------------------------------------------------------------------------------------------
// Evaluation

class EvaluationError : public std::domain_error {
public:
    EvaluationError(const std::string& what, std::vector<double> point, std::optional<std::size_t> site = std::nullopt)
        : std::domain_error(describe(what, point, site)), point_(std::move(point)), site_(site) {}

    [[nodiscard]] const std::vector<double>& point() const { return point_; }
    [[nodiscard]] std::optional<std::size_t> site() const { return site_; }

private:
    static std::string describe(const std::string& what, const std::vector<double>& p, std::optional<std::size_t> site) {
        std::string s = what + " at ";
        if (site) s += "site " + std::to_string(*site) + " ";
        s += "(";
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) s += ", ";
            s += (i < kVariableNames.size() ? std::string(kVariableNames[i]) : "x" + std::to_string(i)) + " = " +
                 format_double(p[i]);
        }
        return s + ")";
    }
    std::vector<double> point_;
    std::optional<std::size_t> site_;
};

inline constexpr double kDivisionGuard = 1e-300;

namespace detail {

struct DomainFault {
    std::string what;
};

inline double eval(const Expr& e, std::span<const double> x) {
    switch (e.kind) {
        case Expr::Kind::constant: return e.value;
        case Expr::Kind::variable:
            if (static_cast<std::size_t>(e.axis) >= x.size())
                throw DomainFault{"variable '" + std::string(kVariableNames[static_cast<std::size_t>(e.axis)]) +
                                  "' outside the ambient dimension " + std::to_string(x.size())};
            return x[static_cast<std::size_t>(e.axis)];
        case Expr::Kind::negate: return -eval(*e.lhs, x);
        case Expr::Kind::add: return eval(*e.lhs, x) + eval(*e.rhs, x);
        case Expr::Kind::sub: return eval(*e.lhs, x) - eval(*e.rhs, x);
        case Expr::Kind::mul: return eval(*e.lhs, x) * eval(*e.rhs, x);
        case Expr::Kind::div: {
            const double d = eval(*e.rhs, x);
            if (std::abs(d) < kDivisionGuard) throw DomainFault{"division by " + format_double(d)};
            return eval(*e.lhs, x) / d;
        }
        case Expr::Kind::pow: {
            const double b = eval(*e.lhs, x), p = eval(*e.rhs, x);
            const double v = std::pow(b, p);
            if (std::isnan(v)) throw DomainFault{"pow(" + format_double(b) + ", " + format_double(p) + ") undefined"};
            if (std::isinf(v)) throw DomainFault{"pow(" + format_double(b) + ", " + format_double(p) + ") overflows"};
            return v;
        }
        case Expr::Kind::call: {
            const double a = eval(*e.lhs, x);
            switch (e.func) {
                case Func::sin: return std::sin(a);
                case Func::cos: return std::cos(a);
                case Func::exp: {
                    const double v = std::exp(a);
                    if (std::isinf(v)) throw DomainFault{"exp(" + format_double(a) + ") overflows"};
                    return v;
                }
                case Func::sqrt:
                    if (a < 0.0) throw DomainFault{"sqrt of negative value " + format_double(a)};
                    return std::sqrt(a);
                case Func::tanh: return std::tanh(a);
                case Func::abs: return std::abs(a);
            }
        }
    }
    return 0.0;
}

}  // namespace detail

/// Value at a point; throws EvaluationError naming the point on a domain fault.
inline double evaluate(const ExprPtr& e, std::span<const double> x) {
    try {
        return detail::eval(*e, x);
    } catch (const detail::DomainFault& f) {
        throw EvaluationError(f.what, std::vector<double>(x.begin(), x.end()));
    }
}

/// Rejects variables beyond the ambient dimension.
inline void check_variables(const ExprPtr& e, int dim) {
    const int m = max_axis(e);
    if (m >= dim)
        throw std::invalid_argument("variable '" + std::string(kVariableNames[static_cast<std::size_t>(m)]) +
                                    "' outside the ambient dimension " + std::to_string(dim));
}

/// Per-site evaluation; domain faults name the site.
inline ScalarField evaluate(const ExprPtr& e, const Lattice& lat) {
    check_variables(e, lat.dim());
    Vector v(static_cast<Eigen::Index>(lat.sites()));
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const auto x = lat.coords(s);
        try {
            v(static_cast<Eigen::Index>(s)) = detail::eval(*e, x);
        } catch (const detail::DomainFault& f) {
            throw EvaluationError(f.what, std::vector<double>(x.begin(), x.end()), s);
        }
    }
    return {lat, std::move(v)};
}

inline PointFunction to_function(ExprPtr e) {
    return [e = std::move(e)](std::span<const double> x) { return cplx(evaluate(e, x)); };
}

/// Seeded random expression over the first `dim` variables with nonnegative constants.
/// With `safe`, only operations that are total and finite on bounded boxes are used
/// (no division except by 1 + (.)^2, sqrt only of 1 + (.)^2, exp of -(.)^2).
inline ExprPtr random_expression(std::mt19937_64& rng, int depth, int dim, bool safe = true) {
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_int_distribution<int> var(0, std::max(0, dim - 1));
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    auto leaf = [&]() -> ExprPtr {
        if (pick(rng) < 5) return make_variable(var(rng));
        return make_constant(std::round(uni(rng) * 100.0) / 100.0);
    };
    if (depth <= 0) return leaf();
    auto sub = [&] { return random_expression(rng, depth - 1, dim, safe); };
    auto one_plus_square = [](ExprPtr e) {
        return make_binary(Expr::Kind::add, make_constant(1.0), make_binary(Expr::Kind::pow, std::move(e), make_constant(2.0)));
    };
    // operands are drawn in sequence so the result does not depend on argument evaluation order
    auto binary = [&](Expr::Kind k) {
        auto l = sub();
        auto r = sub();
        return make_binary(k, std::move(l), std::move(r));
    };
    switch (pick(rng)) {
        case 0: return leaf();
        case 1: return binary(Expr::Kind::add);
        case 2: return binary(Expr::Kind::sub);
        case 3: return binary(Expr::Kind::mul);
        case 4: {
            auto l = sub();
            auto r = sub();
            return make_binary(Expr::Kind::div, std::move(l), safe ? one_plus_square(std::move(r)) : std::move(r));
        }
        case 5: return make_unary(Expr::Kind::negate, sub());
        case 6: {
            auto base = sub();
            return make_binary(Expr::Kind::pow, std::move(base), make_constant(static_cast<double>(1 + pick(rng) % 3)));
        }
        case 7: {
            auto arg = sub();
            return make_unary(Expr::Kind::call, std::move(arg), pick(rng) % 2 ? Func::sin : Func::cos);
        }
        case 8: {
            auto arg = sub();
            if (!safe) return make_unary(Expr::Kind::call, std::move(arg), Func::exp);
            return make_unary(Expr::Kind::call,
                              make_unary(Expr::Kind::negate, make_binary(Expr::Kind::pow, std::move(arg), make_constant(2.0))),
                              Func::exp);
        }
        default: {
            auto arg = sub();
            if (safe) return make_unary(Expr::Kind::call, one_plus_square(std::move(arg)), Func::sqrt);
            return make_unary(Expr::Kind::call, std::move(arg), pick(rng) % 2 ? Func::tanh : Func::abs);
        }
    }
}

}  // namespace lnc
