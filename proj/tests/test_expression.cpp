#include "lnc/expression.hpp"

#include <catch_amalgamated.hpp>

using namespace lnc;

namespace {

ParseError parse_failure(std::string_view text) {
    try {
        parse_expression(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a parse error for '" << text << "'");
    throw std::logic_error("unreachable");
}

double at(const std::string& text, std::vector<double> x) { return evaluate(parse_expression(text), x); }

}  // namespace

TEST_CASE("parsing and precedence", "[expression]") {
    const auto t = parse_expression("t");
    CHECK(t->kind == Expr::Kind::variable);
    CHECK(t->axis == 0);
    CHECK(at("sqrt(1+t^2)", {1.0}) == std::sqrt(2.0));
    CHECK(at("-t^2", {3.0}) == -9.0);
    CHECK(at("2^3^2", {0.0}) == 512.0);
    CHECK(at("2^-1", {0.0}) == 0.5);
    CHECK(at("8/4/2", {0.0}) == 1.0);
    CHECK(at("1 - 2 - 3", {0.0}) == -4.0);
    CHECK(at("2*x + y*3", {0.0, 1.0, 2.0}) == 8.0);
    CHECK(at("-(-x)", {0.0, 1.5}) == 1.5);
    CHECK(at("abs(tanh(-t)) + cos(0) + exp(0) + sin(0)", {0.0}) == 2.0);
    CHECK(at("1.5e-1 * 2E+1", {0.0}) == Catch::Approx(3.0));
    CHECK(at("t\n  + 1", {1.0}) == 2.0);
}

TEST_CASE("parse errors carry kind and position", "[expression]") {
    auto e = parse_failure("t +* x");
    CHECK(e.kind() == ParseError::Kind::unexpected_token);
    CHECK(e.line() == 1);
    CHECK(e.column() == 4);

    e = parse_failure("t + foo(x)");
    CHECK(e.kind() == ParseError::Kind::unknown_identifier);
    CHECK(e.column() == 5);

    e = parse_failure("(t + x");
    CHECK(e.kind() == ParseError::Kind::unbalanced_parens);
    CHECK(e.column() == 1);

    e = parse_failure("t + x)");
    CHECK(e.kind() == ParseError::Kind::unbalanced_parens);
    CHECK(e.column() == 6);

    e = parse_failure("sin(t, x)");
    CHECK(e.kind() == ParseError::Kind::arity_mismatch);
    CHECK(parse_failure("cos()").kind() == ParseError::Kind::arity_mismatch);
    CHECK(parse_failure("exp t").kind() == ParseError::Kind::arity_mismatch);

    e = parse_failure("t +\n  $");
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
    CHECK(parse_failure("").kind() == ParseError::Kind::empty);
    CHECK(parse_failure("1.2.3").kind() == ParseError::Kind::bad_number);
    CHECK(parse_failure("t(1)").kind() == ParseError::Kind::unexpected_token);
    CHECK_THAT(std::string(parse_failure("t +* x").what()), Catch::Matchers::ContainsSubstring("line 1, column 4"));
}

TEST_CASE("evaluation on lattices", "[expression]") {
    const Lattice lat({{-1.0, 1.0, 5}, {-1.0, 1.0, 5}}, Boundary::clamped);
    const auto one = evaluate(parse_expression("1"), lat);
    for (std::size_t s = 0; s < lat.sites(); ++s) CHECK(one[s] == 1.0);

    const auto g = evaluate(parse_expression("exp(-t^2 - x^2)"), lat);
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const auto x = lat.coords(s);
        CHECK(std::abs(g[s] - std::exp(-x[0] * x[0] - x[1] * x[1])) <= 1e-15);
    }

    try {
        evaluate(parse_expression("1/x"), lat);
        FAIL("division by zero not detected");
    } catch (const EvaluationError& e) {
        REQUIRE(e.site());
        CHECK(lat.coords(*e.site())[1] == 0.0);
        CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("site"));
    }
    CHECK_THROWS_AS(evaluate(parse_expression("sqrt(t)"), lat), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse_expression("t^0.5"), lat), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse_expression("y + t"), lat), std::invalid_argument);
    CHECK(to_function(parse_expression("x*t"))(std::vector<double>{2.0, 3.0}) == cplx(6.0));
}

TEST_CASE("pretty-print round trip on 100 expressions", "[expression]") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        const auto e = random_expression(rng, 1 + i % 5, 4, i % 2 == 0);
        const auto text = to_string(e);
        INFO(text);
        const auto back = parse_expression(text);
        CHECK(same_ast(e, back));
        CHECK(to_string(back) == text);
    }
    for (const char* s : {"-t^2", "(-t)^2", "t - (x - y)", "t/(x*y)", "2^3^2", "(2^3)^2", "--x", "-(t + 1)", "1e-05*t"})
        CHECK(same_ast(parse_expression(to_string(parse_expression(s))), parse_expression(s)));
    CHECK(to_string(parse_expression("(t)*((x))+1")) == "t*x + 1");
}

TEST_CASE("random safe expressions are total", "[expression]") {
    std::mt19937_64 rng(9);
    const Lattice lat({{-5.0, 5.0, 11}, {-5.0, 5.0, 11}}, Boundary::clamped);
    for (int i = 0; i < 50; ++i) CHECK_NOTHROW(evaluate(random_expression(rng, 4, 2, true), lat));
}
