#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dqpt/run.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "run configuration file");
    cmd->add_option("--out", args.out, "output directory")->capture_default_str();
    cmd->add_option("--set", args.sets, "field override key=value (repeatable)");
}

dqpt::RunConfig load(const CommonArgs& args, const std::string& mode) {
    dqpt::RunConfig cfg;
    if (!args.config.empty()) cfg = dqpt::parse_config_file(args.config);
    cfg.mode = mode;
    for (const auto& s : args.sets) dqpt::apply_override(cfg, s);
    return cfg;
}

int finish(const dqpt::RunOutput& out) {
    if (out.exit_code != 0) {
        std::cerr << "error: " << out.error << "\n";
    } else {
        std::cout << out.events.size() << " event(s)";
        for (const auto& e : out.events) {
            std::cout << "  [t=" << e.event.time << " "
                      << (e.classified ? dqpt::to_string(e.cls.type) : "unclassified") << "]";
        }
        std::cout << "\n";
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"infinite-MPS quench simulator and DQPT classifier"};
    app.require_subcommand(1);

    CommonArgs evolve_args, ansatz_args, ed_args, analyze_args, sweep_args;
    auto* cmd_evolve = app.add_subcommand("evolve", "iTEBD time evolution");
    add_common(cmd_evolve, evolve_args);
    auto* cmd_ansatz = app.add_subcommand("ansatz", "closed-form chi=2 ansatz trajectory");
    add_common(cmd_ansatz, ansatz_args);
    auto* cmd_ed = app.add_subcommand("ed", "exact diagonalization reference");
    add_common(cmd_ed, ed_args);
    auto* cmd_analyze = app.add_subcommand("analyze", "detect/classify DQPTs from a CSV");
    add_common(cmd_analyze, analyze_args);
    bool check = false;
    cmd_analyze->add_flag("--check", check, "validate row invariants");
    std::string csv_in;
    cmd_analyze->add_option("--csv", csv_in, "input CSV (defaults to <out>/timeseries.csv)");

    auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(cmd_sweep, sweep_args);
    std::string param, values;
    cmd_sweep->add_option("--param", param, "parameter name(s), comma-joined")->required();
    cmd_sweep->add_option("--values", values, "value tuples, e.g. 0.15:1,0.35:0.9")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_evolve->parsed()) return finish(dqpt::run(load(evolve_args, "evolve"), evolve_args.out));
        if (cmd_ansatz->parsed()) return finish(dqpt::run(load(ansatz_args, "ansatz"), ansatz_args.out));
        if (cmd_ed->parsed()) return finish(dqpt::run(load(ed_args, "ed"), ed_args.out));
        if (cmd_analyze->parsed()) {
            dqpt::RunConfig cfg = load(analyze_args, "analyze");
            cfg.check = check || cfg.check;
            if (!csv_in.empty()) cfg.csv_in = csv_in;
            return finish(dqpt::run(cfg, analyze_args.out));
        }
        if (cmd_sweep->parsed()) {
            dqpt::RunConfig base = load(sweep_args, "evolve");
            dqpt::SweepSpec spec = dqpt::parse_sweep(param, values);
            dqpt::SweepOutput out = dqpt::sweep(base, spec, sweep_args.out);
            std::cout << "sweep: " << spec.points.size() << " run(s), summary at "
                      << out.summary_path.string() << "\n";
            return out.exit_code;
        }
    } catch (const dqpt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dqpt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
