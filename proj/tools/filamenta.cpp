#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "filamenta/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Detection and inference of filamentary structure in point patterns"};
    app.set_version_flag("--version", std::string(filamenta::kVersion));
    app.require_subcommand(1);

    filamenta::CommandOptions opts;
    std::uint64_t seed = 0;
    std::string points, method, table;
    double scale = 1.0;

    const char* help[] = {
        "Observed blunt triads and tetrads against the Poisson null",
        "Simulate a filament, cluster or Poisson pattern",
        "Find filaments by arc search or spanning tree",
        "Rejection ABC for the filament process parameters",
        "Extract points from gridded fields or a catalogue",
        "Recompute a published table and check it",
    };
    const auto names = filamenta::commandNames();
    for (std::size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config,-c", opts.configPath, "JSON configuration file")->check(CLI::ExistingFile);
        CLI::Option* seedOpt = sub->add_option("--seed,-s", seed, "Master seed");
        CLI::Option* scaleOpt = nullptr;
        sub->add_option("--out,-o", opts.outDir, "Output directory")->capture_default_str();
        sub->add_option("--workers,-j", opts.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        if (names[i] == "diagnose" || names[i] == "search" || names[i] == "abc") {
            sub->add_option("--points,-p", points, "Point CSV (overrides the config)");
        }
        if (names[i] == "search") {
            sub->add_option("--method,-m", method, "as or mst")->check(CLI::IsMember({"as", "mst"}));
        }
        if (names[i] == "reproduce") {
            sub->add_option("--table,-t", table, "Table name or 'all'");
            scaleOpt = sub->add_option("--scale", scale, "Fraction of published replicate counts")->check(CLI::Range(1e-6, 1.0));
        }
        sub->final_callback([&, seedOpt, scaleOpt, name = names[i]] {
            opts.command = name;
            if (seedOpt->count() > 0) opts.seed = seed;
            if (!points.empty()) opts.points = points;
            if (!method.empty()) opts.method = method;
            if (!table.empty()) opts.table = table;
            if (scaleOpt != nullptr && scaleOpt->count() > 0) opts.scale = scale;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : filamenta::kExitInvalid;
    }
    return filamenta::runCommand(opts, std::cout, std::cerr);
}
