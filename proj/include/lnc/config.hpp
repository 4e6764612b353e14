#pragma once

// Run configuration: a single JSON document, validated exhaustively (every problem is collected
// before ConfigError is thrown). Precedence: built-in defaults < config file < command-line flags.
// Output directory: --out > "out_dir" in the config > $LNC_OUT_DIR > "lnc_out".

#include "lnc/expression.hpp"
#include "lnc/lattice.hpp"
#include "lnc/moyal.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lnc {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
    [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid configuration (" + std::to_string(p.size()) + " problem" + (p.size() == 1 ? "" : "s") + "):";
        for (const auto& m : p) s += "\n  - " + m;
        return s;
    }
    std::vector<std::string> problems_;
};

struct CandidateSpec {
    std::string expr;
    int degree = 1;
};

struct MoyalOptions {
    int dimension = 3;
    int truncation = 16;          ///< N for the matrix-basis delta algebra
    int cross_truncation = 8;     ///< basis elements compared against quadrature
    std::string engine = "all";   ///< all | quadrature | twisted | matrix
    std::vector<std::string> tests{"delta", "engines", "commutator", "associativity", "trace", "involution",
                                   "time", "commutative_time"};
    double half_width = 7.0;      ///< quadrature box for basis elements
    int quadrature_points = 128;
    int lattice_points = 64;      ///< twisted engine, per noncommutative axis
    double lattice_half_width = 8.0;
};

struct FiltrationOptions {
    int pairs = 100;
    int decompositions = 20;
    int trials = 500;
    int toy_sites = 8;
    int points = 33;
    double t_extent = 4.0;
};

struct RunConfig {
    int dimension = 2;
    std::vector<Axis> box;  ///< extents; points filled from resolution
    int resolution = 16;
    std::optional<Boundary> boundary;  ///< per-command default when absent
    std::optional<std::vector<double>> theta;  ///< n*n row-major or n(n-1)/2 upper triangle (moyal dimension)
    std::string u = "1";
    std::vector<CandidateSpec> candidates;  ///< empty: defaults derived from the dimension
    std::uint64_t seed = 1;
    std::optional<std::string> pairs_path;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;  ///< inline pairs
    int random_pairs = 50;
    int equivalence_samples = 1000;
    MoyalOptions moyal;
    FiltrationOptions filtration;
    std::optional<std::string> out_dir;

    [[nodiscard]] Lattice lattice(Boundary fallback) const {
        std::vector<Axis> axes = box;
        for (auto& a : axes) a.points = resolution;
        return {axes, boundary.value_or(fallback)};
    }

    [[nodiscard]] ExprPtr u_expr() const { return parse_expression(u); }

    /// Theta in the moyal dimension; the default is the (x, y) block with theta = 0.5.
    [[nodiscard]] ThetaMatrix theta_matrix() const {
        const int n = moyal.dimension;
        if (!theta) return n >= 3 ? ThetaMatrix::planar(n, 1, 2, 0.5) : ThetaMatrix::planar(n, 0, 1, 0.5);
        const auto& v = *theta;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        if (static_cast<int>(v.size()) == n * n) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
        } else if (static_cast<int>(v.size()) == n * (n - 1) / 2) {
            std::size_t k = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    m(i, j) = v[k++];
                    m(j, i) = -m(i, j);
                }
        } else {
            throw std::invalid_argument("theta: expected " + std::to_string(n * n) + " or " +
                                        std::to_string(n * (n - 1) / 2) + " entries for dimension " + std::to_string(n) +
                                        ", got " + std::to_string(v.size()));
        }
        return ThetaMatrix(m);
    }

    [[nodiscard]] std::string output_directory() const {
        if (out_dir) return *out_dir;
        if (const char* env = std::getenv("LNC_OUT_DIR"); env && *env) return env;
        return "lnc_out";
    }

    /// Candidate expressions: configured ones, else t and boosted times (t - v x^i)/sqrt(1 - v^2), v = +-0.5.
    [[nodiscard]] std::vector<CandidateSpec> candidate_specs() const {
        if (!candidates.empty()) return candidates;
        std::vector<CandidateSpec> out{{"t", 1}};
        for (int i = 1; i < dimension; ++i)
            for (const char* sign : {"-", "+"})
                out.push_back({"(t " + std::string(sign) + " 0.5*" + std::string(kVariableNames[static_cast<std::size_t>(i)]) +
                                   ")/sqrt(0.75)",
                               1});
        return out;
    }
};

namespace detail {

struct Validator {
    std::vector<std::string> problems;

    void fail(const std::string& m) { problems.push_back(m); }

    template <class T>
    std::optional<T> get(const nlohmann::json& j, const std::string& key, const std::string& path) {
        if (!j.contains(key)) return std::nullopt;
        try {
            return j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(path + key + ": wrong type (" + std::string(j.at(key).type_name()) + ")");
            return std::nullopt;
        }
    }

    std::optional<int> get_int(const nlohmann::json& j, const std::string& key, const std::string& path) {
        if (!j.contains(key)) return std::nullopt;
        if (!j.at(key).is_number_integer()) {
            fail(path + key + ": expected an integer");
            return std::nullopt;
        }
        return j.at(key).get<int>();
    }

    std::optional<double> get_number(const nlohmann::json& j, const std::string& key, const std::string& path) {
        if (!j.contains(key)) return std::nullopt;
        if (!j.at(key).is_number()) {
            fail(path + key + ": expected a number");
            return std::nullopt;
        }
        return j.at(key).get<double>();
    }

    void unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const std::string& path) {
        for (const auto& [k, v] : j.items())
            if (!known.count(k)) fail(path + k + ": unknown key");
    }
};

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument(what + ": empty entry in '" + text + "'");
        const std::string s = item.substr(b, e - b + 1);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw std::invalid_argument(what + ": '" + s + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument(what + ": no entries");
    return out;
}

}  // namespace detail

/// Command-line overrides (absent fields leave the config untouched).
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> pairs_path;
    std::optional<std::string> theta;  ///< "a,b,c..."
    std::optional<std::string> u;
    std::optional<int> resolution;
};

/// Builds and validates a config: defaults, then the JSON document (may be null), then overrides.
/// Theta entries are interpreted in the moyal dimension (moyal.dimension, default 3).
inline RunConfig make_config(const nlohmann::json& doc, const Overrides& ov = {}) {
    detail::Validator v;
    RunConfig c;
    const nlohmann::json j = doc.is_null() ? nlohmann::json::object() : doc;
    if (!j.is_object()) throw ConfigError({"config: top level must be a JSON object"});
    v.unknown_keys(j,
                   {"dimension", "box", "extent", "resolution", "boundary", "theta", "u", "candidates", "seed", "pairs",
                    "pairs_file", "random_pairs", "equivalence_samples", "moyal", "filtration", "out_dir"},
                   "");

    if (auto n = v.get_int(j, "dimension", "")) c.dimension = *n;
    if (c.dimension < 2 || c.dimension > 4) {
        v.fail("dimension: must be in 2..4 (variables t, x, y, z), got " + std::to_string(c.dimension));
        c.dimension = std::clamp(c.dimension, 2, 4);
    }
    if (auto r = v.get_int(j, "resolution", "")) c.resolution = *r;
    if (ov.resolution) c.resolution = *ov.resolution;
    if (c.resolution < 4) v.fail("resolution: must be >= 4, got " + std::to_string(c.resolution));

    c.box.assign(static_cast<std::size_t>(c.dimension), Axis{-2.0, 2.0, c.resolution});
    if (j.contains("box") && j.contains("extent")) v.fail("box/extent: give one of them, not both");
    if (j.contains("extent")) {
        if (auto e = v.get<std::vector<double>>(j, "extent", ""); e) {
            if (e->size() != 2)
                v.fail("extent: expected [min, max]");
            else
                for (auto& a : c.box) a = Axis{(*e)[0], (*e)[1], c.resolution};
        }
    }
    if (j.contains("box")) {
        if (auto b = v.get<std::vector<std::vector<double>>>(j, "box", ""); b) {
            if (b->size() != c.box.size())
                v.fail("box: expected " + std::to_string(c.box.size()) + " [min, max] intervals, got " + std::to_string(b->size()));
            else
                for (std::size_t k = 0; k < b->size(); ++k) {
                    if ((*b)[k].size() != 2)
                        v.fail("box[" + std::to_string(k) + "]: expected [min, max]");
                    else
                        c.box[k] = Axis{(*b)[k][0], (*b)[k][1], c.resolution};
                }
        }
    }
    for (std::size_t k = 0; k < c.box.size(); ++k)
        if (!(c.box[k].max > c.box[k].min))
            v.fail("box[" + std::to_string(k) + "]: max must exceed min, got [" + format_double(c.box[k].min) + ", " +
                   format_double(c.box[k].max) + "]");

    if (auto b = v.get<std::string>(j, "boundary", "")) {
        if (*b == "periodic")
            c.boundary = Boundary::periodic;
        else if (*b == "clamped")
            c.boundary = Boundary::clamped;
        else
            v.fail("boundary: expected \"periodic\" or \"clamped\", got \"" + *b + "\"");
    }

    if (auto s = v.get_int(j, "seed", "")) {
        if (*s < 0)
            v.fail("seed: must be nonnegative");
        else
            c.seed = static_cast<std::uint64_t>(*s);
    }
    if (ov.seed) c.seed = *ov.seed;

    if (auto u = v.get<std::string>(j, "u", "")) c.u = *u;
    if (ov.u) c.u = *ov.u;
    try {
        const auto e = parse_expression(c.u);
        check_variables(e, c.dimension);
        if (max_axis(e) > 0) v.fail("u: must depend on t only (g = -u(t) dt^2 + dx^2), got \"" + c.u + "\"");
        const auto field = evaluate(e, c.lattice(Boundary::periodic));
        double worst = std::numeric_limits<double>::infinity();
        std::size_t site = 0;
        for (std::size_t s = 0; s < field.size(); ++s)
            if (field[s].real() < worst) {
                worst = field[s].real();
                site = s;
            }
        if (!(worst > 0.0)) {
            const auto x = field.lattice().coords(site);
            std::string at;
            for (std::size_t k = 0; k < x.size(); ++k)
                at += (k ? ", " : "") + std::string(kVariableNames[k]) + " = " + format_double(x[k]);
            v.fail("u: must be positive on the lattice, u = " + format_double(worst) + " at (" + at + ")");
        }
    } catch (const std::exception& e) {
        v.fail("u: " + std::string(e.what()));
    }

    if (j.contains("candidates")) {
        if (!j["candidates"].is_array()) {
            v.fail("candidates: expected an array");
        } else {
            for (std::size_t i = 0; i < j["candidates"].size(); ++i) {
                const auto& item = j["candidates"][i];
                const std::string path = "candidates[" + std::to_string(i) + "].";
                CandidateSpec spec;
                if (item.is_string()) {
                    spec.expr = item.get<std::string>();
                } else if (item.is_object()) {
                    v.unknown_keys(item, {"expr", "degree"}, path);
                    if (auto e = v.get<std::string>(item, "expr", path)) spec.expr = *e;
                    else v.fail(path + "expr: missing");
                    if (auto d = v.get_int(item, "degree", path)) spec.degree = *d;
                } else {
                    v.fail("candidates[" + std::to_string(i) + "]: expected a string or {expr, degree}");
                    continue;
                }
                try {
                    check_variables(parse_expression(spec.expr), c.dimension);
                } catch (const std::exception& e) {
                    v.fail(path + "expr: " + e.what());
                }
                c.candidates.push_back(spec);
            }
        }
    }

    if (auto p = v.get<std::string>(j, "pairs_file", "")) c.pairs_path = *p;
    if (ov.pairs_path) c.pairs_path = *ov.pairs_path;
    if (j.contains("pairs")) {
        if (auto ps = v.get<std::vector<std::vector<std::vector<double>>>>(j, "pairs", ""); ps) {
            for (std::size_t i = 0; i < ps->size(); ++i) {
                const auto& pq = (*ps)[i];
                if (pq.size() != 2 || pq[0].size() != static_cast<std::size_t>(c.dimension) ||
                    pq[1].size() != static_cast<std::size_t>(c.dimension))
                    v.fail("pairs[" + std::to_string(i) + "]: expected [p, q] with " + std::to_string(c.dimension) +
                           " coordinates each");
                else
                    c.pairs.emplace_back(pq[0], pq[1]);
            }
        }
    }
    if (auto r = v.get_int(j, "random_pairs", "")) c.random_pairs = *r;
    if (c.random_pairs < 0) v.fail("random_pairs: must be nonnegative");
    if (auto r = v.get_int(j, "equivalence_samples", "")) c.equivalence_samples = *r;
    if (c.equivalence_samples < 1) v.fail("equivalence_samples: must be positive");

    if (j.contains("moyal")) {
        const auto& m = j["moyal"];
        if (!m.is_object()) {
            v.fail("moyal: expected an object");
        } else {
            const std::string p = "moyal.";
            v.unknown_keys(m,
                           {"dimension", "N", "cross_N", "engine", "tests", "half_width", "quadrature_points",
                            "lattice_points", "lattice_half_width"},
                           p);
            if (auto x = v.get_int(m, "dimension", p)) c.moyal.dimension = *x;
            if (auto x = v.get_int(m, "N", p)) c.moyal.truncation = *x;
            if (auto x = v.get_int(m, "cross_N", p)) c.moyal.cross_truncation = *x;
            if (auto x = v.get<std::string>(m, "engine", p)) c.moyal.engine = *x;
            if (auto x = v.get<std::vector<std::string>>(m, "tests", p)) c.moyal.tests = *x;
            if (auto x = v.get_number(m, "half_width", p)) c.moyal.half_width = *x;
            if (auto x = v.get_int(m, "quadrature_points", p)) c.moyal.quadrature_points = *x;
            if (auto x = v.get_int(m, "lattice_points", p)) c.moyal.lattice_points = *x;
            if (auto x = v.get_number(m, "lattice_half_width", p)) c.moyal.lattice_half_width = *x;
        }
    }
    if (c.moyal.dimension < 2 || c.moyal.dimension > 4) {
        v.fail("moyal.dimension: must be in 2..4, got " + std::to_string(c.moyal.dimension));
        c.moyal.dimension = 3;
    }
    if (c.moyal.truncation < 1) v.fail("moyal.N: truncation must be >= 1, got " + std::to_string(c.moyal.truncation));
    if (c.moyal.cross_truncation < 1 || c.moyal.cross_truncation > c.moyal.truncation)
        v.fail("moyal.cross_N: must be in 1..N");
    if (!std::set<std::string>{"all", "quadrature", "twisted", "matrix"}.count(c.moyal.engine))
        v.fail("moyal.engine: expected all|quadrature|twisted|matrix, got \"" + c.moyal.engine + "\"");
    {
        const std::set<std::string> known{"delta", "engines", "commutator", "associativity", "trace", "involution",
                                          "time", "commutative_time"};
        for (const auto& t : c.moyal.tests)
            if (!known.count(t)) v.fail("moyal.tests: unknown test \"" + t + "\"");
    }
    if (!(c.moyal.half_width > 0)) v.fail("moyal.half_width: must be positive");
    if (c.moyal.quadrature_points < 16 || c.moyal.quadrature_points % 2)
        v.fail("moyal.quadrature_points: must be even and >= 16");
    if (c.moyal.lattice_points < 8) v.fail("moyal.lattice_points: must be >= 8");
    if (!(c.moyal.lattice_half_width > 0)) v.fail("moyal.lattice_half_width: must be positive");

    if (j.contains("filtration")) {
        const auto& f = j["filtration"];
        if (!f.is_object()) {
            v.fail("filtration: expected an object");
        } else {
            const std::string p = "filtration.";
            v.unknown_keys(f, {"pairs", "decompositions", "trials", "toy_sites", "points", "t_extent"}, p);
            if (auto x = v.get_int(f, "pairs", p)) c.filtration.pairs = *x;
            if (auto x = v.get_int(f, "decompositions", p)) c.filtration.decompositions = *x;
            if (auto x = v.get_int(f, "trials", p)) c.filtration.trials = *x;
            if (auto x = v.get_int(f, "toy_sites", p)) c.filtration.toy_sites = *x;
            if (auto x = v.get_int(f, "points", p)) c.filtration.points = *x;
            if (auto x = v.get_number(f, "t_extent", p)) c.filtration.t_extent = *x;
        }
    }
    if (c.filtration.pairs < 1 || c.filtration.decompositions < 1 || c.filtration.trials < 1)
        v.fail("filtration: pairs, decompositions and trials must be positive");
    if (c.filtration.toy_sites < 1) v.fail("filtration.toy_sites: must be positive");
    if (c.filtration.points < 4) v.fail("filtration.points: must be >= 4");
    if (!(c.filtration.t_extent > 0)) v.fail("filtration.t_extent: must be positive");

    if (j.contains("theta")) {
        const auto& t = j["theta"];
        if (t.is_array() && !t.empty() && t[0].is_array()) {
            if (auto rows = v.get<std::vector<std::vector<double>>>(j, "theta", ""); rows) {
                std::vector<double> flat;
                for (const auto& r : *rows) flat.insert(flat.end(), r.begin(), r.end());
                c.theta = flat;
            }
        } else if (auto flat = v.get<std::vector<double>>(j, "theta", ""); flat) {
            c.theta = *flat;
        }
    }
    if (ov.theta) {
        try {
            c.theta = detail::parse_number_list(*ov.theta, "--theta");
        } catch (const std::exception& e) {
            v.fail(e.what());
        }
    }
    if (c.theta) {
        try {
            (void)c.theta_matrix();
        } catch (const std::exception& e) {
            v.fail(std::string("theta: ") + e.what());
        }
    }

    if (auto o = v.get<std::string>(j, "out_dir", "")) c.out_dir = *o;
    if (ov.out_dir) c.out_dir = *ov.out_dir;

    if (!v.problems.empty()) throw ConfigError(v.problems);
    return c;
}

/// Reads and validates a config file (JSON syntax errors are config errors).
inline RunConfig load_config(const std::optional<std::string>& path, const Overrides& ov = {}) {
    nlohmann::json doc;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError({"config: cannot open '" + *path + "'"});
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError({"config: " + std::string(e.what())});
        }
    }
    return make_config(doc, ov);
}

/// Pairs CSV: one pair per line, p coordinates then q coordinates (2n numbers); an optional
/// non-numeric header line and blank lines are skipped.
inline std::vector<std::pair<std::vector<double>, std::vector<double>>> read_pairs_csv(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"pairs: cannot open '" + path + "'"});
    std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
    std::vector<std::string> problems;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> vals;
        try {
            vals = detail::parse_number_list(line, "pairs line " + std::to_string(lineno));
        } catch (const std::exception& e) {
            if (lineno == 1) continue;  // header
            problems.push_back(e.what());
            continue;
        }
        if (static_cast<int>(vals.size()) != 2 * n) {
            problems.push_back("pairs line " + std::to_string(lineno) + ": expected " + std::to_string(2 * n) +
                               " numbers (p then q), got " + std::to_string(vals.size()));
            continue;
        }
        out.emplace_back(std::vector<double>(vals.begin(), vals.begin() + n), std::vector<double>(vals.begin() + n, vals.end()));
    }
    if (!problems.empty()) throw ConfigError(problems);
    return out;
}

}  // namespace lnc
