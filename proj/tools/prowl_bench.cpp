#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "prowl/bench.hpp"

namespace {

prowl::SweepConfig::Mode parse_mode(const std::string& s) {
    if (s == "rho") return prowl::SweepConfig::Mode::Rho;
    if (s == "n") return prowl::SweepConfig::Mode::N;
    if (s == "ablation") return prowl::SweepConfig::Mode::Ablation;
    throw std::invalid_argument("--mode must be one of rho, n, ablation");
}

prowl::SelectionMode parse_selection(const std::string& s) {
    if (s == "tied") return prowl::SelectionMode::TiedTemperature;
    if (s == "product") return prowl::SelectionMode::ProductGrid;
    if (s == "hinge") return prowl::SelectionMode::HingeFamily;
    throw std::invalid_argument("--selection must be one of tied, product, hinge");
}

std::vector<std::string> split_commas(const std::string& csv) {
    std::vector<std::string> out;
    std::string token;
    std::stringstream ss(csv);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

/// Plain key=value config file; '#' starts a comment. Keys mirror the long
/// flag names. Values loaded here are overridden by explicit flags.
std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            const std::size_t last = s.find_last_not_of(ws);
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

struct CliState {
    prowl::SweepConfig cfg;
    std::string mode = "rho";
    std::string selection = "tied";
    std::string methods_csv;
    bool no_timing = false;
};

void apply_config(const std::map<std::string, std::string>& kv, CliState* st) {
    for (const auto& [key, value] : kv) {
        if (key == "scenario") st->cfg.scenario = std::stoi(value);
        else if (key == "mode") st->mode = value;
        else if (key == "reps") st->cfg.reps = std::stoi(value);
        else if (key == "seed") st->cfg.seed = std::stoull(value);
        else if (key == "out") st->cfg.out_path = value;
        else if (key == "delta") st->cfg.delta = std::stod(value);
        else if (key == "epsilon") st->cfg.epsilon = std::stod(value);
        else if (key == "threads") st->cfg.threads = std::stoi(value);
        else if (key == "budget-seconds") st->cfg.budget_seconds = std::stod(value);
        else if (key == "n-test") st->cfg.n_test = std::stol(value);
        else if (key == "inner-draws") st->cfg.inner_draws = std::stoi(value);
        else if (key == "fixed-n") st->cfg.fixed_n = std::stol(value);
        else if (key == "fixed-rho") st->cfg.fixed_rho = std::stod(value);
        else if (key == "n") st->cfg.diag_n = std::stol(value);
        else if (key == "methods") st->methods_csv = value;
        else if (key == "selection") st->selection = value;
        else if (key == "no-timing") st->no_timing = value == "1" || value == "true";
        else throw std::runtime_error("unknown config key '" + key + "'");
    }
}

void add_shared_options(CLI::App* cmd, CliState* st, std::string* config_path) {
    cmd->add_option("--config", *config_path, "key=value config file; flags override it");
    cmd->add_option("--reps", st->cfg.reps, "Monte Carlo replications");
    cmd->add_option("--seed", st->cfg.seed, "base seed; replicate r uses seed + r");
    cmd->add_option("--out", st->cfg.out_path, "output CSV path");
    cmd->add_option("--delta", st->cfg.delta, "bound confidence tolerance");
    cmd->add_option("--epsilon", st->cfg.epsilon, "overlap floor (default per scenario)");
    cmd->add_option("--threads", st->cfg.threads, "worker threads (0 = hardware)");
    cmd->add_option("--budget-seconds", st->cfg.budget_seconds,
                    "abort cells after this wall-clock budget (0 = unlimited)");
    cmd->add_option("--n-test", st->cfg.n_test, "test sample size");
    cmd->add_option("--inner-draws", st->cfg.inner_draws, "inner draws per certified mean");
    cmd->add_flag("--no-timing", st->no_timing, "write runtime_seconds = 0 for byte-stable output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PROWL benchmark harness"};
    app.require_subcommand(1);

    CliState st;
    std::string config_path_echo;  // consumed by the pre-scan above main's parse

    CLI::App* sweep = app.add_subcommand("sweep", "rho/n sweep or split-free ablation");
    sweep->add_option("--scenario", st.cfg.scenario, "1 or 2");
    sweep->add_option("--mode", st.mode, "rho, n, or ablation");
    sweep->add_option("--fixed-n", st.cfg.fixed_n, "sample size of the rho sweep");
    sweep->add_option("--fixed-rho", st.cfg.fixed_rho, "uncertainty level of the n sweep");
    sweep->add_option("--methods", st.methods_csv,
                      "comma list: prowl,prowl-u0,prowl-split,owl:R,owl:uR,rwl:R,rwl:uR,"
                      "qlearn:R,qlearn:uR");
    sweep->add_option("--selection", st.selection, "tied, product, or hinge");
    add_shared_options(sweep, &st, &config_path_echo);

    CLI::App* diag = app.add_subcommand("diagnostics", "certificate diagnostics table");
    diag->add_option("--scenario", st.cfg.scenario, "1, 2, or 0 for both");
    diag->add_option("--n", st.cfg.diag_n, "sample size per replication");
    add_shared_options(diag, &st, &config_path_echo);

    std::string plot_in, plot_kind = "target_regret", plot_out;
    CLI::App* plot = app.add_subcommand("plot", "render a metrics CSV as a static SVG");
    plot->add_option("--in", plot_in, "metrics CSV")->required();
    plot->add_option("--kind", plot_kind,
                     "regret, target_regret, robust_regret, proxy_target_gap, "
                     "target_certified_gap, e_u, or lcb");
    plot->add_option("--out", plot_out, "output SVG path")->required();

    try {
        // The config file loads before flag parsing so explicit flags win.
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc) {
                apply_config(load_config(argv[i + 1]), &st);
            } else if (arg.rfind("--config=", 0) == 0) {
                apply_config(load_config(arg.substr(9)), &st);
            }
        }
        CLI11_PARSE(app, argc, argv);

        if (sweep->parsed()) {
            if (st.cfg.out_path.empty()) throw std::runtime_error("sweep requires --out");
            st.cfg.mode = parse_mode(st.mode);
            st.cfg.selection = parse_selection(st.selection);
            st.cfg.timing = !st.no_timing;
            if (!st.methods_csv.empty()) st.cfg.methods = split_commas(st.methods_csv);
            prowl::run_sweep(st.cfg);
            std::cout << "wrote " << st.cfg.out_path << " and "
                      << prowl::summary_path_for(st.cfg.out_path) << "\n";
        } else if (diag->parsed()) {
            if (st.cfg.out_path.empty()) throw std::runtime_error("diagnostics requires --out");
            st.cfg.mode = prowl::SweepConfig::Mode::Diagnostics;
            st.cfg.timing = !st.no_timing;
            prowl::run_diagnostics(st.cfg);
            std::cout << "wrote " << st.cfg.out_path << "\n";
        } else if (plot->parsed()) {
            prowl::emit_plots(plot_in, plot_kind, plot_out);
            std::cout << "wrote " << plot_out << "\n";
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "prowl-bench: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
