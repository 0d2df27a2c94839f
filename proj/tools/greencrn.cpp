// Command-line front end: training, evaluation and every experiment sweep.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "greencrn/config.hpp"
#include "greencrn/harness.hpp"
#include "greencrn/train.hpp"

namespace fs = std::filesystem;
using namespace greencrn;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kCheckFailed = 3;

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out = "out";
    std::string policy;
    bool no_ris = false;
    bool no_eh = false;
    bool trace = false;
    std::size_t workers = 0;
    std::string checkpoint;
    std::vector<std::string> overrides;
    bool check = false;
};

std::ofstream open_out(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return os;
}

ScenarioConfig resolve(const Options& o)
{
    ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + kv + "' is not key=value", 0, kv);
        }
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed_set) {
        cfg.seed = o.seed;
    }
    if (!o.policy.empty()) {
        cfg.policy = parse_policy(o.policy);
    }
    cfg.no_ris = cfg.no_ris || o.no_ris;
    cfg.no_eh = cfg.no_eh || o.no_eh;
    if (o.workers > 0) {
        cfg.workers = o.workers;
    }
    cfg.validate();
    return cfg;
}

// An explicit --checkpoint must fit; the bundled default is only used when it does.
std::shared_ptr<const PolicyParams> policy_for(const ScenarioConfig& cfg, const Options& o)
{
    if (!o.checkpoint.empty()) {
        if (!fs::exists(o.checkpoint)) {
            throw std::runtime_error("checkpoint " + o.checkpoint + " does not exist");
        }
        return obtain_policy(cfg, o.checkpoint, false, &std::cerr);
    }
    const fs::path bundled = GREENCRN_DEFAULT_CHECKPOINT;
    if (fs::exists(bundled)) {
        const auto p = load_checkpoint(bundled);
        if (p.input_dim == Featurizer::dimension(cfg.channels, cfg.history_window) &&
            p.head_sizes == Simulator::head_sizes(cfg) && p.hidden == cfg.hidden) {
            std::cerr << "using bundled checkpoint " << bundled.string() << '\n';
            return std::make_shared<const PolicyParams>(p);
        }
        std::cerr << "bundled checkpoint does not fit this scenario; training a fresh policy\n";
    }
    return obtain_policy(cfg, {}, false, &std::cerr);
}

bool needs_proposed(const std::vector<PolicyKind>& ps)
{
    for (auto p : ps) {
        if (p == PolicyKind::Proposed) {
            return true;
        }
    }
    return false;
}

int run(const std::string& command, const Options& o)
{
    const ScenarioConfig cfg = resolve(o);
    const fs::path out = o.out;
    fs::create_directories(out);
    open_out(out / "config.txt") << echo_config(cfg);

    const std::vector<PolicyKind> selected =
        o.policy.empty() ? all_policies() : std::vector<PolicyKind>{cfg.policy};

    if (command == "train") {
        const fs::path dest = o.checkpoint.empty() ? out / "proposed.gcrn" : fs::path(o.checkpoint);
        auto res = train_policy(cfg, initial_policy(cfg, cfg.seed), cfg.episodes, cfg.seed,
                                [](std::size_t ep, double ret) {
                                    if ((ep + 1) % 10 == 0) {
                                        std::cerr << "episode " << ep + 1 << " mean return " << format_number(ret)
                                                  << '\n';
                                    }
                                });
        if (dest.has_parent_path()) {
            fs::create_directories(dest.parent_path());
        }
        save_checkpoint(dest, res.params);
        auto os = open_out(out / "train_returns.csv");
        os << "episode,mean_return\n";
        for (std::size_t i = 0; i < res.returns.size(); ++i) {
            os << i + 1 << ',' << format_number(res.returns[i]) << '\n';
        }
        std::cout << "wrote " << dest.string() << '\n';
        return kOk;
    }

    if (command == "eval") {
        const std::vector<PolicyKind> ps{cfg.policy};
        auto params = needs_proposed(ps) ? policy_for(cfg, o) : nullptr;
        const auto res = run_compare(cfg, ps, params, cfg.workers);
        {
            auto os = open_out(out / "eval.csv");
            write_summary_csv(os, res);
        }
        write_summary_table(std::cout, res);
        if (o.trace) {
            auto os = open_out(out / "trace.csv");
            Simulator::write_trace_header(os);
            SimOptions so;
            so.trace = &os;
            run_episode(cfg, cfg.policy, cfg.seed, params, so);
        }
        return kOk;
    }

    if (command == "compare") {
        auto params = needs_proposed(selected) ? policy_for(cfg, o) : nullptr;
        const auto res = run_compare(cfg, selected, params, cfg.workers);
        {
            auto os = open_out(out / "summary.csv");
            write_summary_csv(os, res);
        }
        {
            auto os = open_out(out / "summary.txt");
            write_summary_table(os, res);
        }
        {
            auto os = open_out(out / "crn.csv");
            write_crn_csv(os, res);
        }
        write_summary_table(std::cout, res);
        return kOk;
    }

    if (command == "sweep-density") {
        auto params = policy_for(cfg, o);
        const auto rows = sweep_density(cfg, cfg.sweep_densities, params, cfg.workers);
        auto os = open_out(out / "density.csv");
        write_density_csv(os, rows);
        write_density_csv(std::cout, rows);
        return kOk;
    }

    if (command == "sweep-energy") {
        auto params = policy_for(cfg, o);
        const auto rows = sweep_energy_budget(cfg, cfg.sweep_budgets_j, params, cfg.workers);
        auto os = open_out(out / "energy_budget.csv");
        write_budget_csv(os, rows);
        write_budget_csv(std::cout, rows);
        return kOk;
    }

    if (command == "roc") {
        auto params = needs_proposed(selected) ? policy_for(cfg, o) : nullptr;
        const auto tables = roc_study(cfg, selected, params, cfg.workers);
        for (std::size_t i = 0; i < selected.size(); ++i) {
            auto os = open_out(out / ("roc_" + to_string(selected[i]) + ".csv"));
            write_roc_csv(os, tables[i]);
        }
        std::cout << "wrote " << selected.size() << " ROC tables to " << out.string() << '\n';
        return kOk;
    }

    if (command == "ablate") {
        auto params = policy_for(cfg, o);
        const auto res = ablate(cfg, params, cfg.workers);
        {
            auto os = open_out(out / "ablation.csv");
            write_ablation_csv(os, res);
        }
        write_ablation_csv(std::cout, res);
        if (o.check && !(res.power_ok && res.grid_ok)) {
            return kCheckFailed;
        }
        return kOk;
    }

    if (command == "timing") {
        auto params = policy_for(cfg, o);
        const auto rows = report_timing(cfg, params);
        auto os = open_out(out / "timing.csv");
        write_timing_csv(os, rows);
        write_timing_csv(std::cout, rows);
        return kOk;
    }

    throw std::logic_error("unhandled command " + command);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"greencrn: energy-aware cognitive radio simulator"};
    app.require_subcommand(1);
    Options o;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"train", "train the proposed policy and write a checkpoint"},
        {"eval", "evaluate one policy over the configured seeds"},
        {"compare", "evaluate all policies on common random numbers (summary.csv, summary.txt, crn.csv)"},
        {"sweep-density", "sweep the SU count (density.csv)"},
        {"sweep-energy", "sweep the per-SU energy budget (energy_budget.csv)"},
        {"roc", "empirical and analytic ROC tables per policy"},
        {"ablate", "full / no_ris / no_eh variants of the proposed policy (ablation.csv)"},
        {"timing", "per-slot decision and refinement timing (timing.csv)"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "flat key=value scenario file")->check(CLI::ExistingFile);
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { o.seed = s; o.seed_set = true; }, "base seed");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--policy", o.policy, "traditional | hybrid | proposed");
        sub->add_flag("--no-ris", o.no_ris, "remove the reflecting surface");
        sub->add_flag("--no-eh", o.no_eh, "disable energy harvesting");
        sub->add_flag("--trace", o.trace, "eval: write a per-slot trace.csv for the first seed");
        sub->add_option("--workers", o.workers, "worker threads (output bytes do not depend on this)");
        sub->add_option("--checkpoint", o.checkpoint, "policy checkpoint to load (train: where to write)");
        sub->add_option("--set", o.overrides, "extra key=value config overrides");
        sub->add_flag("--check", o.check, "ablate: exit 3 when a directional threshold is missed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
