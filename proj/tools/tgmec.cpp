// Command-line front end: validate configs, run single trials with a full
// per-user dump, run preset or custom sweeps, list presets.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgmec/constraints.hpp"
#include "tgmec/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

tgmec::SystemConfig load_or_default(const std::string& path)
{
    if (path.empty())
        return tgmec::SystemConfig{};
    return tgmec::load_config_file(path);
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int cmd_validate(const std::string& config_path)
{
    tgmec::SystemConfig cfg;
    try {
        cfg = tgmec::load_config_file(config_path);
    } catch (const tgmec::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }
    const auto violations = tgmec::validate_config(cfg);
    if (violations.empty()) {
        std::cout << "ok\n";
        return kExitOk;
    }
    for (const auto& v : violations)
        std::cerr << v.field << ": " << v.message << "\n";
    return kExitConfig;
}

int cmd_trial(const std::string& config_path, std::uint64_t seed,
              const std::vector<std::string>& scheme_names, const std::string& out_dir)
{
    tgmec::SystemConfig cfg;
    try {
        cfg = load_or_default(config_path);
        const auto violations = tgmec::validate_config(cfg);
        if (!violations.empty()) {
            for (const auto& v : violations)
                std::cerr << v.field << ": " << v.message << "\n";
            return kExitConfig;
        }
    } catch (const tgmec::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<tgmec::Scheme> schemes;
    for (const auto& n : scheme_names) {
        const auto s = tgmec::parse_scheme(n);
        if (!s) {
            std::cerr << "unknown scheme '" << n << "'\n";
            return kExitUsage;
        }
        schemes.push_back(*s);
    }
    if (schemes.empty())
        schemes.push_back(tgmec::Scheme::Jraco);

    try {
        const auto scn = tgmec::generate_scenario(cfg, seed);
        for (const auto scheme : schemes) {
            std::string text;
            text += "scheme " + std::string(tgmec::scheme_name(scheme)) + " seed "
                + std::to_string(seed) + "\n";
            if (scheme == tgmec::Scheme::Jraco) {
                const auto pre = tgmec::run_raco(scn);
                const auto outcome = tgmec::enforce_budget_detailed(pre, scn);
                text += outcome.assignment.dump();
                for (const auto& line : outcome.log)
                    text += "adjust: " + line + "\n";
            } else {
                const auto a = tgmec::run_scheme(
                    scheme, scn, tgmec::scheme_seed(seed, scheme));
                text += a.dump();
            }
            if (out_dir.empty()) {
                std::cout << text;
            } else {
                std::filesystem::create_directories(out_dir);
                const auto path = std::filesystem::path(out_dir)
                    / ("trial_" + std::string(tgmec::scheme_name(scheme)) + "_seed"
                       + std::to_string(seed) + ".txt");
                write_file(path, text);
                std::cout << "wrote " << path.string() << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "trial failed (seed " << seed << "): " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& preset,
              const std::string& parameter, const std::vector<double>& values,
              int trials, std::uint64_t seed, int parallel,
              const std::vector<std::string>& scheme_names, const std::string& out_dir)
{
    tgmec::SweepSpec spec;
    try {
        const auto base = load_or_default(config_path);
        if (!preset.empty()) {
            spec = tgmec::preset_spec(preset, base);
        } else {
            if (parameter.empty() || values.empty()) {
                std::cerr << "custom sweeps need --param and --values\n";
                return kExitUsage;
            }
            spec.base = base;
            spec.parameter = parameter;
            spec.values = values;
        }
        if (trials > 0)
            spec.trials = trials;
        if (!scheme_names.empty()) {
            spec.schemes.clear();
            for (const auto& n : scheme_names) {
                const auto s = tgmec::parse_scheme(n);
                if (!s) {
                    std::cerr << "unknown scheme '" << n << "'\n";
                    return kExitUsage;
                }
                spec.schemes.push_back(*s);
            }
        }
        tgmec::validate_spec(spec);
        const auto violations = tgmec::validate_config(spec.base);
        if (!violations.empty()) {
            for (const auto& v : violations)
                std::cerr << v.field << ": " << v.message << "\n";
            return kExitConfig;
        }
    } catch (const tgmec::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const auto report = tgmec::run_sweep(spec, seed, parallel);
        std::filesystem::create_directories(out_dir);
        const auto raw_path = std::filesystem::path(out_dir) / (spec.name + "_raw.csv");
        const auto summary_path =
            std::filesystem::path(out_dir) / (spec.name + "_summary.csv");
        write_file(raw_path, report.raw_csv());
        write_file(summary_path, report.summary_csv());
        std::cout << "wrote " << raw_path.string() << "\n";
        std::cout << "wrote " << summary_path.string() << "\n";
    } catch (const tgmec::TrialFailure& e) {
        std::cerr << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "sweep failed: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_presets()
{
    for (const auto& name : tgmec::preset_names()) {
        const auto spec = tgmec::preset_spec(name);
        std::cout << name << ": users=" << spec.base.num_users
                  << " subchannels=" << spec.base.num_subchannels << " sweep "
                  << spec.parameter << " over";
        for (double v : spec.values)
            std::cout << " " << tgmec::fmt_g(v);
        std::cout << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"train-ground edge offloading simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, preset, parameter;
    std::vector<std::string> scheme_names;
    std::vector<double> values;
    std::uint64_t seed = 1;
    int trials = 0;
    int parallel = 1;

    auto* validate = app.add_subcommand("validate", "check a config file");
    std::string validate_path;
    validate->add_option("config", validate_path, "config file")->required();

    auto* trial = app.add_subcommand("trial", "run one scenario and dump per-user state");
    trial->add_option("--config", config_path, "config file (defaults when omitted)");
    trial->add_option("--seed", seed, "scenario seed");
    trial->add_option("--scheme", scheme_names, "scheme(s) to run")->delimiter(',');
    trial->add_option("--out", out_dir, "output directory (stdout when omitted)");

    auto* sweep = app.add_subcommand("sweep", "run a preset or custom parameter sweep");
    sweep->add_option("--config", config_path, "base config file");
    sweep->add_option("--preset", preset, "preset name (see 'presets')");
    sweep->add_option("--param", parameter, "swept parameter for custom sweeps");
    sweep->add_option("--values", values, "sweep values for custom sweeps")->delimiter(',');
    sweep->add_option("--trials", trials, "trials per sweep point");
    sweep->add_option("--seed", seed, "master seed");
    sweep->add_option("--parallel", parallel, "concurrent trial workers");
    sweep->add_option("--scheme", scheme_names, "scheme(s) to run")->delimiter(',');
    sweep->add_option("--out", out_dir, "output directory")->required();

    app.add_subcommand("presets", "list preset sweeps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (app.got_subcommand("validate"))
        return cmd_validate(validate_path);
    if (app.got_subcommand("trial"))
        return cmd_trial(config_path, seed, scheme_names, out_dir);
    if (app.got_subcommand("sweep"))
        return cmd_sweep(config_path, preset, parameter, values, trials, seed, parallel,
                         scheme_names, out_dir);
    return cmd_presets();
}
