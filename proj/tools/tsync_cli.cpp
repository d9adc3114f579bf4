// tsync: command-line front end for the experiments and the acceptance suite.

#include "tsync/acceptance.hpp"
#include "tsync/config.hpp"
#include "tsync/errors.hpp"
#include "tsync/experiments.hpp"
#include "tsync/parallel.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <sstream>

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required)
{
    auto* opt = cmd->add_option("--config", flags.config, "scenario JSON file");
    if (config_required) {
        opt->required()->check(CLI::ExistingFile);
    }
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--threads", flags.threads, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", flags.out, "output directory (default: the config's output_dir)");
}

std::set<int> parse_ids(const std::string& text)
{
    std::set<int> ids;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const int id = std::stoi(item);
        if (id < 1 || id > 9) {
            throw tsync::ConfigError("--criteria: ids must lie in 1..9, got " + item, 0);
        }
        ids.insert(id);
    }
    return ids;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-type particle synchronization experiments"};
    app.require_subcommand(1);

    using Runner = tsync::RunResult (*)(const tsync::ScenarioConfig&, const tsync::RunOptions&);
    const std::pair<const char*, Runner> commands[] = {
        {"simulate", tsync::cmd_simulate},
        {"two-particle", tsync::cmd_two_particle},
        {"pde", tsync::cmd_pde},
        {"scan", tsync::cmd_scan},
    };
    CommonFlags flags;
    std::vector<std::pair<CLI::App*, Runner>> subs;
    for (const auto& [name, fn] : commands) {
        auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        add_common(cmd, flags, true);
        subs.emplace_back(cmd, fn);
    }

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    add_common(verify, flags, false);
    std::string mutate = "none";
    std::string criteria;
    verify->add_option("--mutate", mutate, "inject a known defect")->check(CLI::IsMember({"none", "exchange-sign"}));
    verify->add_option("--criteria", criteria, "comma-separated subset of criteria 1-9");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        tsync::set_thread_count(flags.threads);
        if (verify->parsed()) {
            tsync::AcceptanceOptions options;
            if (!flags.config.empty()) {
                options.seed = tsync::load_config(flags.config).seed;
            }
            if (flags.seed) {
                options.seed = *flags.seed;
            }
            options.mutation = mutate == "exchange-sign" ? tsync::Mutation::ExchangeSign : tsync::Mutation::None;
            if (!criteria.empty()) {
                options.only = parse_ids(criteria);
            }
            return tsync::cmd_verify(options, flags.out.empty() ? "verify_out" : flags.out);
        }
        for (const auto& [cmd, fn] : subs) {
            if (!cmd->parsed()) {
                continue;
            }
            tsync::ScenarioConfig config = tsync::load_config(flags.config);
            if (flags.seed) {
                config.seed = *flags.seed;
            }
            tsync::RunOptions options;
            options.out_dir = flags.out.empty() ? config.output_dir : flags.out;
            const tsync::RunResult result = fn(config, options);
            std::cout << result.summary.dump(2) << std::endl;
            return result.exit_code;
        }
    } catch (const tsync::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
