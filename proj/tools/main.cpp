#include <iostream>

#include <CLI11.hpp>

#include "serfsim/commands.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid hydrogen-potassium magnetometer simulator"};
    app.require_subcommand(1);

    serf::cli::GlobalOptions global;
    std::string config_path;
    std::uint64_t seed = 0;

    for (const std::string& name : serf::cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "Parameter file (key = value with units)");
        sub->add_option("--seed", seed, "RNG seed, overrides the config");
        sub->add_option("--threads", global.threads, "Worker threads (0: all)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--plot", global.plot, "Also write SVG plots");
        sub->add_option("--out", global.out, "Output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : serf::cli::usage_error;
    }

    const CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed"))
        global.seed = seed;

    serf::config::ConfigFile file;
    file.source = "<defaults>";
    if (!config_path.empty()) {
        try {
            file = serf::config::load_config(config_path);
        } catch (const serf::config::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return serf::cli::config_error;
        }
    }
    const int code = serf::cli::run(sub->get_name(), file, global, std::cerr);
    if (code == 0)
        std::cout << "wrote " << global.out << "/manifest.json\n";
    return code;
}
