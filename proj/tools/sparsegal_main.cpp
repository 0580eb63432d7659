#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sparsegal/check.hpp"
#include "sparsegal/report.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sparsegal::InputError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galois groups of sparse polynomial systems"};
    app.require_subcommand(1);

    std::string path;
    std::string format = "text";
    sparsegal::ReportConfig config;

    const auto add_common = [&](CLI::App* cmd, bool with_numerics) {
        cmd->add_option("path", path, "input document")->required();
        cmd->add_option("--format", format, "output format: json or text")
            ->check(CLI::IsMember({"json", "text"}));
        if (with_numerics) {
            cmd->add_option("--seed", config.seed, "random seed");
            cmd->add_option("--budget", config.budget, "loop budget");
            cmd->add_option("--newton-tol", config.newton_tol, "Newton residual tolerance");
            cmd->add_option("--match-tol", config.match_tol, "fiber matching tolerance");
        }
    };

    CLI::App* analyze =
        app.add_subcommand("analyze", "combinatorial verdict for a support tuple");
    add_common(analyze, true);
    CLI::App* monodromy =
        app.add_subcommand("monodromy", "numerical monodromy reconstruction");
    add_common(monodromy, true);
    CLI::App* mixed_volume =
        app.add_subcommand("mixed-volume", "mixed volume of the support hulls");
    add_common(mixed_volume, false);
    CLI::App* connectivity =
        app.add_subcommand("connectivity", "inductive-connectivity decision");
    add_common(connectivity, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const std::string text = read_file(path);
        sparsegal::Json report;
        if (analyze->parsed()) {
            report = sparsegal::analysis_report(sparsegal::parse_tuple_document(text), config);
        } else if (monodromy->parsed()) {
            report = sparsegal::monodromy_report(sparsegal::parse_tuple_document(text), config);
        } else if (mixed_volume->parsed()) {
            report = sparsegal::mixed_volume_report(sparsegal::parse_tuple_document(text));
        } else {
            report = sparsegal::connectivity_report(
                sparsegal::parse_connectivity_document(text));
        }
        std::cout << (format == "json" ? sparsegal::render_json(report)
                                       : sparsegal::render_text(report));
        return 0;
    } catch (const sparsegal::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const sparsegal::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
