// memcentric <simulate|attack|pud|trng|pnm|sweep> --config <path> [--seed N] [--out path] [--format csv|json]
//
// Exit status: 0 success, 1 usage error, 2 invalid configuration or input
// file, 3 runtime failure (protocol, capacity, scheduling or invariant error).

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "memcentric/harness/run.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
};

int run(const std::string& command, const Options& o) {
    using namespace memcentric;
    using namespace memcentric::harness;
    ExperimentConfig cfg = parse_config(o.config);
    if (o.seed)
        override_seed(cfg, *o.seed);
    const Format fmt = parse_format(o.format.empty() ? cfg.output_format : o.format);
    const MetricsReport rep = run_command(cfg, command);
    for (const auto& n : rep.notes)
        std::cerr << n << "\n";
    std::optional<std::filesystem::path> out;
    if (!o.out.empty())
        out = o.out;
    else
        out = cfg.output_path;
    if (out) {
        emit(rep, fmt, *out);
        std::cerr << "wrote " << out->string();
        if (fmt == Format::csv && !rep.detail.columns().empty())
            std::cerr << " and " << detail_path(*out).string();
        std::cerr << "\n";
    } else if (fmt == Format::json) {
        std::cout << render_json(rep);
    } else {
        std::cout << rep.summary.csv();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRAM and near-memory computing simulator"};
    app.require_subcommand(1, 1);
    Options o;
    for (const auto& name : memcentric::harness::subcommands()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config,-c", o.config, "experiment YAML file")->required();
        sub->add_option("--seed", o.seed, "override the configured seed");
        sub->add_option("--out,-o", o.out, "output file (default: config output.path, else stdout)");
        sub->add_option("--format,-f", o.format, "csv or json (default: config output.format, else csv)")
            ->check(CLI::IsMember({"csv", "json"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const memcentric::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const memcentric::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
