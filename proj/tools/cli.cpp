#include "iaps/cli.hpp"

#include "iaps/experiments.hpp"
#include "iaps/oracles.hpp"
#include "iaps/scenario.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace iaps {

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    int trials = -1;
    long long seed = -1;
    int threads = 0;
};

ScenarioConfig load_config(const CommonOpts& opts) {
    ScenarioConfig cfg;
    if (!opts.config_path.empty()) cfg = config_from_json(slurp(opts.config_path));
    for (const std::string& kv : opts.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.trials > 0) cfg.trials = opts.trials;
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.validate();
    return cfg;
}

fs::path resolve_out_dir(const CommonOpts& opts) {
    std::string dir = opts.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("IAPS_OUT");
        if (env != nullptr) dir = env;
    }
    if (dir.empty()) dir = "out";
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const ScenarioConfig& cfg, const nlohmann::json& extra) {
    nlohmann::json m;
    m["command"] = command;
    m["config"] = nlohmann::json::parse(config_to_json(cfg));
    m["config_fnv64"] = hex64(oracle::fnv1a64(config_to_json(cfg)));
    m["seed"] = cfg.seed;
    m["trials"] = cfg.trials;
    m["tool_version"] = "iaps 0.1.0";
    m["csv_schema"] = "figure,scheme,regime,x,mean,stderr,trials,infeasible_count";
    for (const auto& [k, v] : extra.items()) m[k] = v;
    spit(out_dir / "manifest.json", m.dump(2) + "\n");
}

int cmd_gen_scenario(const CommonOpts& opts, std::ostream& out) {
    ScenarioConfig cfg = load_config(opts);
    fs::path dir = resolve_out_dir(opts);
    RngStream rng = RngStream(cfg.seed).substream(0x7261696c).substream(0);
    Layout lay = generate_layout(cfg, rng);
    ChannelSet ch = draw_channels(lay, cfg, rng);
    {
        std::ofstream f(dir / "layout.csv", std::ios::binary);
        layout_to_csv(lay, f);
    }
    {
        std::ofstream f(dir / "channels.csv", std::ios::binary);
        channels_to_csv(ch, f);
    }
    write_manifest(dir, "gen-scenario", cfg, {{"files", {"layout.csv", "channels.csv"}}});
    out << "wrote " << (dir / "layout.csv").string() << " and channels.csv\n";
    return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& figure, const std::string& spec_path,
            std::ostream& out) {
    ScenarioConfig cfg = load_config(opts);
    ExperimentSpec spec;
    if (!spec_path.empty()) {
        spec = spec_from_json(slurp(spec_path));
        if (opts.trials > 0) spec.trials = opts.trials;
        if (opts.seed >= 0) spec.seed = static_cast<std::uint64_t>(opts.seed);
    } else {
        if (figure.empty())
            throw std::invalid_argument("run: pass --figure <id> or --spec <file>");
        spec = spec_for_figure(figure, cfg);
    }
    spec.threads = opts.threads;
    spec.validate();

    auto points = run_figure(spec);

    fs::path dir = resolve_out_dir(opts);
    fs::path csv_path = dir / (spec.figure + ".csv");
    {
        std::ofstream f(csv_path, std::ios::binary);
        emit_csv(points, f);
    }
    emit_plot(csv_path.string(), (dir / (spec.figure + ".svg")).string());

    long total = 0, infeasible = 0;
    for (const auto& pt : points) {
        total += pt.trials_used + pt.infeasible;
        infeasible += pt.infeasible;
    }
    nlohmann::json extra;
    extra["figure"] = spec.figure;
    extra["spec"] = nlohmann::json::parse(spec_to_json(spec));
    extra["rows"] = points.size();
    extra["infeasible_total"] = infeasible;
    extra["evaluations_total"] = total;
    write_manifest(dir, "run", spec.base, extra);

    out << "wrote " << csv_path.string() << " (" << points.size() << " rows, " << infeasible
        << "/" << total << " infeasible evaluations)\n";
    if (total > 0 && infeasible * 2 > total) {
        out << "more than half of all trials were infeasible\n";
        return 2;
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"DFRC integrated active/passive sensing simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string figure, spec_path, csv_path, plot_out;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "scenario config JSON");
        cmd->add_option("--out", opts.out_dir, "output directory (or $IAPS_OUT)");
        cmd->add_option("--set", opts.overrides, "config override key=value")->take_all();
        cmd->add_option("--trials", opts.trials, "Monte Carlo trials");
        cmd->add_option("--seed", opts.seed, "RNG seed");
        cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
    };

    CLI::App* gen = app.add_subcommand("gen-scenario", "draw a deployment and export CSVs");
    add_common(gen);

    CLI::App* run = app.add_subcommand("run", "run a figure experiment and write CSV + SVG");
    add_common(run);
    run->add_option("--figure", figure, "figure id (fig2..fig4, fig6..fig11, tradeoff)");
    run->add_option("--spec", spec_path, "experiment spec JSON (overrides --figure)");

    CLI::App* plot = app.add_subcommand("plot", "render an existing CSV as SVG");
    plot->add_option("--csv", csv_path, "input CSV")->required();
    plot->add_option("--out-file", plot_out, "output SVG path")->required();

    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in property suite");
    (void)selftest;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "write independent oracle tables");
    add_common(oracle_cmd);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_scenario(opts, out);
        if (run->parsed()) return cmd_run(opts, figure, spec_path, out);
        if (plot->parsed()) {
            emit_plot(csv_path, plot_out);
            out << "wrote " << plot_out << "\n";
            return 0;
        }
        if (selftest->parsed()) return run_selftest(out) == 0 ? 0 : 1;
        if (oracle_cmd->parsed())
            return write_oracle_tables(resolve_out_dir(opts).string(), out);
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace iaps
