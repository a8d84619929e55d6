#include <omp.h>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "fivec/errors.hpp"

namespace {

using fivec::cli::RunConfig;
using Command = int (*)(const RunConfig&, std::ostream&);

const std::map<std::string, std::pair<Command, std::string>>& commands() {
    static const std::map<std::string, std::pair<Command, std::string>> table{
        {"speeds", {fivec::cli::cmd_speeds, "P and S wave speeds of a medium"}},
        {"classify", {fivec::cli::cmd_classify, "classify a boundary covector"}},
        {"trace", {fivec::cli::cmd_trace, "trace a ray through a medium"}},
        {"resonance", {fivec::cli::cmd_resonance, "resonance roots for an incoming pair"}},
        {"symbol", {fivec::cli::cmd_symbol, "sweep an interaction symbol over angles"}},
        {"table", {fivec::cli::cmd_table, "evaluate the interaction table for a medium"}},
        {"simulate", {fivec::cli::cmd_simulate, "run a wave-packet interaction experiment"}},
        {"invert", {fivec::cli::cmd_invert, "recover A and B from measurements"}},
    };
    return table;
}

int exit_code_for(fivec::ErrorKind k) {
    switch (k) {
        case fivec::ErrorKind::validation: return 2;
        case fivec::ErrorKind::numeric: return 3;
        case fivec::ErrorKind::io: return 4;
    }
    return 1;
}

const char* kind_name(fivec::ErrorKind k) {
    switch (k) {
        case fivec::ErrorKind::validation: return "validation";
        case fivec::ErrorKind::numeric: return "numeric";
        case fivec::ErrorKind::io: return "io";
    }
    return "unknown";
}

int report_error(const std::string& kind, int code, const std::string& message, const std::string& sub) {
    const nlohmann::json rec{
        {"error", {{"kind", kind}, {"exit_code", code}, {"message", message}, {"subcommand", sub}}}};
    std::cerr << rec.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fivec: nonlinear elastic wave interactions and recovery of third-order moduli"};
    app.require_subcommand(1);

    std::string config_path, out_flag;
    std::vector<std::string> overrides;
    uint64_t seed = 12345;
    int jobs = 0;
    bool dry = false;

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands()) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->add_option("-c,--config", config_path, "JSON config file")->required();
        sub->add_option("-s,--set", overrides, "override a config value, e.g. --set medium.A=-4");
        sub->add_option("-o,--out", out_flag, "output directory (default: $FIVEC_OUTPUT_DIR or ./fivec_out)");
        sub->add_option("--seed", seed, "random seed for Monte-Carlo work");
        sub->add_option("-j,--jobs", jobs, "worker threads (0 keeps the OpenMP default)")->check(CLI::NonNegativeNumber);
        sub->add_flag("-n,--dry-run", dry, "validate and print the plan without computing");
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", 2, e.what(), "");
    }

    std::string name;
    for (const auto& [n, sub] : subs)
        if (sub->parsed()) name = n;

    try {
        RunConfig rc;
        rc.subcommand = name;
        rc.params = fivec::cli::load_config_file(config_path);
        for (const auto& o : overrides) fivec::cli::apply_override(rc.params, o);
        rc.base_dir = std::filesystem::path(config_path).parent_path();
        if (rc.base_dir.empty()) rc.base_dir = ".";
        rc.out_dir = fivec::cli::resolve_output_dir(out_flag);
        rc.seed = seed;
        rc.jobs = jobs;
        rc.dry_run = dry;
        if (jobs > 0) omp_set_num_threads(jobs);
        return commands().at(name).first(rc, std::cout);
    } catch (const fivec::Error& e) {
        return report_error(kind_name(e.kind()), exit_code_for(e.kind()), e.what(), name);
    } catch (const nlohmann::json::exception& e) {
        return report_error("validation", 2, std::string("config: ") + e.what(), name);
    } catch (const std::exception& e) {
        return report_error("internal", 1, e.what(), name);
    }
}
