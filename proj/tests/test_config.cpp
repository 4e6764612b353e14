#include "lnc/config.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>

using namespace lnc;
using nlohmann::json;

namespace {

std::vector<std::string> problems_of(const json& doc, const Overrides& ov = {}) {
    try {
        make_config(doc, ov);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(), [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path.string();
}

}  // namespace

TEST_CASE("defaults", "[config]") {
    const auto c = make_config(json());
    CHECK(c.dimension == 2);
    CHECK(c.seed == 1);
    CHECK(c.lattice(Boundary::clamped).boundary() == Boundary::clamped);
    CHECK(c.lattice(Boundary::periodic).sites() == 16 * 16);
    CHECK(c.candidate_specs().size() == 3);
    const auto th = c.theta_matrix();
    CHECK(th.dim() == 3);
    CHECK(th(1, 2) == 0.5);
    CHECK(check_commutative_time(th).commutative_time);
}

TEST_CASE("all problems are reported together", "[config]") {
    const json doc = {{"dimension", 7},  {"resolution", 2},         {"boundary", "twisted"},
                      {"colour", "red"}, {"moyal", {{"engine", "fast"}, {"N", 0}}}, {"u", "t +"}};
    const auto p = problems_of(doc);
    CHECK(p.size() >= 6);
    CHECK(mentions(p, "dimension"));
    CHECK(mentions(p, "resolution"));
    CHECK(mentions(p, "boundary"));
    CHECK(mentions(p, "colour"));
    CHECK(mentions(p, "moyal.engine"));
    CHECK(mentions(p, "moyal.N"));
    CHECK(mentions(p, "u: parse error"));
    try {
        make_config(doc);
    } catch (const ConfigError& e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(std::to_string(p.size()) + " problems"));
    }
}

TEST_CASE("theta validation", "[config]") {
    CHECK(mentions(problems_of({{"moyal", {{"dimension", 2}}}, {"theta", {{0.0, 0.5}, {-0.25, 0.0}}}}),
                   "Theta(0,1) = 0.5 but Theta(1,0) = -0.25"));
    CHECK(mentions(problems_of({{"theta", {1.0, 2.0}}}), "expected 9 or 3 entries"));
    const auto c = make_config({{"moyal", {{"dimension", 4}}}, {"theta", {0, 0, 0, 0.3, 0, 0}}});
    CHECK(c.theta_matrix()(1, 2) == 0.3);
    CHECK(c.theta_matrix()(2, 1) == -0.3);
    Overrides ov;
    ov.theta = "0.7,0,0";
    const auto tx = make_config(json(), ov).theta_matrix();
    CHECK(tx(0, 1) == 0.7);
    CHECK_FALSE(check_commutative_time(tx).commutative_time);
    ov.theta = "0.7,abc";
    CHECK(mentions(problems_of(json(), ov), "--theta"));
}

TEST_CASE("u must be positive", "[config]") {
    const auto p = problems_of({{"u", "t"}});
    REQUIRE(p.size() == 1);
    CHECK_THAT(p[0], Catch::Matchers::ContainsSubstring("must be positive"));
    CHECK_THAT(p[0], Catch::Matchers::ContainsSubstring("t = -2"));
    CHECK(mentions(problems_of({{"u", "1 + z^2"}}), "u:"));
    CHECK(mentions(problems_of({{"u", "1 + x^2"}}), "depend on t only"));
    CHECK(make_config({{"u", "1 + t^2"}}).u == "1 + t^2");
}

TEST_CASE("overrides take precedence", "[config]") {
    Overrides ov;
    ov.seed = 99;
    ov.resolution = 8;
    ov.u = "2";
    ov.out_dir = "elsewhere";
    const auto c = make_config({{"seed", 3}, {"resolution", 12}, {"u", "3"}, {"out_dir", "cfg_dir"}}, ov);
    CHECK(c.seed == 99);
    CHECK(c.resolution == 8);
    CHECK(c.u == "2");
    CHECK(c.output_directory() == "elsewhere");
    CHECK(make_config({{"out_dir", "cfg_dir"}}).output_directory() == "cfg_dir");
}

TEST_CASE("candidates and inline pairs", "[config]") {
    const auto c = make_config({{"dimension", 3},
                                {"candidates", {"t", {{"expr", "t + 0.1*x*y"}, {"degree", 2}}}},
                                {"pairs", {{{0, 0, 0}, {1, 0.5, 0}}}}});
    REQUIRE(c.candidates.size() == 2);
    CHECK(c.candidates[1].degree == 2);
    REQUIRE(c.pairs.size() == 1);
    CHECK(c.pairs[0].second[1] == 0.5);
    CHECK(mentions(problems_of({{"candidates", {"z"}}}), "candidates[0].expr"));
    CHECK(mentions(problems_of({{"pairs", {{{0, 0}, {1}}}}}), "pairs[0]"));
}

TEST_CASE("pairs CSV and config files", "[config]") {
    const auto ok = temp_file("lnc_pairs_ok.csv", "pt,px,qt,qx\n0,0,1,0.5\r\n\n-1, 0.2, 0.5, 0\n");
    const auto pairs = read_pairs_csv(ok, 2);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1].first == std::vector<double>{-1.0, 0.2});
    const auto bad = temp_file("lnc_pairs_bad.csv", "0,0,1\n0,0,1,x\n");
    try {
        read_pairs_csv(bad, 2);
        FAIL("accepted malformed pairs");
    } catch (const ConfigError& e) {
        CHECK(e.problems().size() == 2);
        CHECK_THAT(e.problems()[0], Catch::Matchers::ContainsSubstring("line 1"));
    }
    CHECK_THROWS_AS(read_pairs_csv("/nonexistent/pairs.csv", 2), ConfigError);
    CHECK_THROWS_AS(load_config(temp_file("lnc_bad.json", "{\"dimension\": 2,")), ConfigError);
    CHECK(load_config(temp_file("lnc_ok.json", "{\"dimension\": 3}")).dimension == 3);
}
