#include "poincare/poincare.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
    std::string config;
    std::string out;
    bool verbose = false;
    std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "output directory (overrides output.directory)");
    cmd->add_flag("--verbose", flags.verbose, "progress on stderr; eigen traces for sharp");
    cmd->add_option("--seed", flags.seed, "override suite.seed");
}

template <class Runner>
int run(const std::string& stem, const Flags& flags, Runner&& runner) {
    const auto config = poincare::load_config(flags.config);
    const std::filesystem::path dir = flags.out.empty() ? config.output_dir : flags.out;
    poincare::TraceLog trace;
    poincare::RunOptions options;
    options.seed = flags.seed;
    if (flags.verbose) {
        options.log = &std::cerr;
        options.trace = &trace;
    }
    const auto table = runner(config, options);
    poincare::write_table(dir, stem, table);
    if (!trace.empty()) {
        std::ofstream os(dir / (stem + "_trace.csv"), std::ios::binary);
        trace.write(os);
    }
    std::size_t failed = 0;
    for (const auto& row : table.rows()) failed += !row.pass;
    std::cerr << stem << ": " << table.rows().size() << " rows, " << failed << " failed -> "
              << (dir / (stem + ".csv")).string() << '\n';
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted and fractional Poincare inequality toolkit"};
    app.require_subcommand(1);

    Flags verify_flags;
    Flags sharp_flags;
    Flags sweep_flags;
    auto* verify = app.add_subcommand("verify", "run inequality checks over the configured cross product");
    auto* sharp = app.add_subcommand("sharp", "estimate sharp constants and compare with the theoretical ones");
    auto* sweep = app.add_subcommand("sweep", "tabulate scaled fractional energies over the s and R axes");
    auto* schema = app.add_subcommand("schema", "print the config JSON schema");
    add_run_flags(verify, verify_flags);
    add_run_flags(sharp, sharp_flags);
    add_run_flags(sweep, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*schema) {
            std::cout << poincare::config_schema().dump(2) << '\n';
            return 0;
        }
        if (*verify) return run("verify", verify_flags, [](const auto& c, const auto& o) { return poincare::run_verify(c, o); });
        if (*sharp) return run("sharp", sharp_flags, [](const auto& c, const auto& o) { return poincare::run_sharp(c, o); });
        if (*sweep) return run("sweep", sweep_flags, [](const auto& c, const auto& o) { return poincare::run_sweep(c, o); });
    } catch (const poincare::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
