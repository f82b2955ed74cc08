#include "gito/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App cli{"GARCH-Ito volatility models with option-implied information"};
    cli.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    for (const auto& name : gito::subcommands()) {
        auto* sub = cli.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "key = value configuration file");
        sub->add_option("-s,--set", overrides, "override one setting, key=value (repeatable)");
        sub->add_option("-o,--output-dir", output_dir, "output directory (default: $GITO_OUTPUT_DIR or .)");
    }
    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : gito::exit_config;
    }

    gito::RunConfig cfg;
    try {
        cfg = gito::RunConfig(cli.get_subcommands().front()->get_name());
        if (!config_path.empty()) gito::read_config_file(cfg, config_path);
        for (const auto& kv : overrides) cfg.set_assignment(kv, "--set");
        if (!output_dir.empty()) cfg.set("output_dir", output_dir);
    } catch (const gito::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return gito::exit_config;
    }
    return gito::run(cfg);
}
