// lnc: command-line front end for the verification suites.
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration / parse / evaluation error.

#include "lnc/suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerics for temporal Lorentzian spectral triples"};
    app.require_subcommand(1);

    std::optional<std::string> config_path, out_dir, pairs_path, theta, u;
    std::optional<std::uint64_t> seed;
    std::optional<int> resolution;
    for (const char* name : {"verify", "distance", "moyal", "filtration", "report"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--out", out_dir, "output directory (default: config out_dir, $LNC_OUT_DIR, lnc_out)");
        sub->add_option("--pairs", pairs_path, "CSV of event pairs: p coordinates then q coordinates per line");
        sub->add_option("--theta", theta, "Theta entries a,b,c... (n*n row-major or upper triangle)");
        sub->add_option("--u", u, "lapse expression u(t, x, ...)");
        sub->add_option("--resolution", resolution, "lattice points per axis");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        lnc::Overrides ov{seed, out_dir, pairs_path, theta, u, resolution};
        const auto cfg = lnc::load_config(config_path, ov);

        lnc::SuiteResult result;
        if (command == "verify")
            result = lnc::verify_suite(cfg);
        else if (command == "distance")
            result = lnc::distance_suite(cfg);
        else if (command == "moyal")
            result = lnc::moyal_suite(cfg);
        else if (command == "filtration")
            result = lnc::filtration_suite(cfg);
        else
            result = lnc::report_suite(cfg);

        // Artifact writing is serialized, after every suite has finished.
        const std::filesystem::path dir = cfg.output_directory();
        std::filesystem::create_directories(dir);
        write_file(dir / (command + ".json"), result.report.dump(2) + "\n");
        if (!result.csv.empty()) write_file(dir / "distance.csv", result.csv);

        std::cout << command << ": " << (result.passed ? "PASS" : "FAIL") << " (artifacts in " << dir.string() << ")\n";
        return result.passed ? 0 : 1;
    } catch (const lnc::ConfigError& e) {
        std::cerr << "lnc " << command << ": " << e.what() << "\n";
        return 2;
    } catch (const lnc::ParseError& e) {
        std::cerr << "lnc " << command << ": " << e.what() << "\n";
        return 2;
    } catch (const lnc::EvaluationError& e) {
        std::cerr << "lnc " << command << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "lnc " << command << ": check failed with error: " << e.what() << "\n";
        return 1;
    }
}
