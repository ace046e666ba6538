// Command-line front end: run / converge / compare-g / bcp / mbe.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "gsav/runner.hpp"

namespace {

using namespace gsav;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    double dt = 0;
    double t_final = -1;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* pos = cmd->add_option("config", args.config_path, "config file (key = value lines)");
    if (config_required) pos->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", args.overrides, "override a config key, e.g. --set time.dt=1e-4");
    cmd->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--dt", args.dt, "time step (overrides time.dt)");
    cmd->add_option("--t-final", args.t_final, "final time (overrides time.t_final)");
    cmd->add_option("--seed", args.seed, "RNG seed (overrides seed)");
}

/// Apply `key = value` lines from a file onto an existing config, keeping
/// any defaults the file does not mention.
void apply_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        const auto e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_common(RunConfig& cfg, const CommonArgs& args) {
    cfg.apply_overrides(args.overrides);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.dt > 0) cfg.dt = args.dt;
    if (args.t_final >= 0) cfg.t_final = args.t_final;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
}

int do_run(const RunConfig& cfg) {
    const RunResult res = run(cfg);
    const auto& last = res.diag.empty() ? DiagRecord{} : res.diag.back();
    std::cout << "completed " << res.state.step << " steps to t = " << res.state.t << "\n";
    if (!res.diag.empty()) {
        std::cout << std::setprecision(10) << "E_original = " << last.e_original
                  << ", E_modified = " << last.e_modified << "\n";
        const auto series = [&] {
            std::vector<double> s;
            const long start = first_audit_index(cfg.make_scheme());
            for (const auto& rec : res.diag)
                if (rec.step >= start) s.push_back(rec.e_modified);
            return s;
        }();
        if (series.size() >= 2) {
            const auto rep = audit_monotone(series, 1e-9);
            std::cout << "modified-energy monotone: " << (rep.pass() ? "yes" : "NO") << " ("
                      << rep.violations.size() << " violations)\n";
        }
    }
    if (!resolve_out_dir(cfg).empty())
        std::cout << "output written to " << resolve_out_dir(cfg) << "\n";
    return 0;
}

std::vector<double> parse_dts(const std::string& list) {
    std::vector<double> out;
    std::istringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    return out;
}

RunConfig bcp_defaults() {
    RunConfig cfg;
    cfg.model = "bcp";
    cfg.scheme = "multi-cn";
    cfg.order = "cn";
    cfg.g = {"exp:1e4"};
    cfg.init = "bcp";
    cfg.nx = cfg.ny = 64;
    cfg.ax = cfg.ay = -1;
    cfg.bx = cfg.by = 1;
    cfg.dt = 1.25e-5;
    cfg.t_final = 4.0;
    cfg.snapshot_every = 40000;
    return cfg;
}

RunConfig mbe_defaults() {
    RunConfig cfg;
    cfg.model = "mbe";
    cfg.epsilon = 0.03;
    cfg.mobility = 1.0;
    cfg.scheme = "second";
    cfg.order = "bdf2";
    cfg.g = {"exp:1e4"};
    cfg.init = "mbe";
    cfg.nx = cfg.ny = 128;
    cfg.ax = cfg.ay = -2 * M_PI;
    cfg.bx = cfg.by = 2 * M_PI;
    cfg.dt = 1e-2;
    cfg.t_final = 100.0;
    cfg.snapshot_every = 1000;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"G-SAV time integrators for gradient flows on periodic grids"};
    app.require_subcommand(1);

    CommonArgs run_args, conv_args, cmp_args, bcp_args, mbe_args;
    std::string dts_list = "8e-4,4e-4,2e-4,1e-4,5e-5,2.5e-5,1.25e-5";
    std::string reference = "exact";
    std::vector<std::string> g_list;
    bool serial = false;

    auto* cmd_run = app.add_subcommand("run", "run one simulation");
    add_common(cmd_run, run_args, true);

    auto* cmd_conv = app.add_subcommand("converge", "step-size refinement study");
    add_common(cmd_conv, conv_args, true);
    cmd_conv->add_option("--dts", dts_list, "comma-separated decreasing step sizes");
    cmd_conv->add_option("--reference", reference, "error reference: exact | fine")
        ->check(CLI::IsMember({"exact", "fine"}));
    cmd_conv->add_flag("--serial", serial, "run ladder members sequentially");

    auto* cmd_cmp = app.add_subcommand("compare-g", "compare runs across G variants");
    add_common(cmd_cmp, cmp_args, true);
    cmd_cmp->add_option("--g", g_list, "G variant (repeatable), e.g. --g tanh:1e4 --g pow:3");
    cmd_cmp->add_flag("--serial", serial, "run variants sequentially");

    auto* cmd_bcp = app.add_subcommand("bcp", "coupled copolymer run (preset parameters)");
    add_common(cmd_bcp, bcp_args, false);

    auto* cmd_mbe = app.add_subcommand("mbe", "film-growth coarsening run (preset parameters)");
    add_common(cmd_mbe, mbe_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            RunConfig cfg = RunConfig::from_file(run_args.config_path);
            apply_common(cfg, run_args);
            return do_run(cfg);
        }
        if (cmd_conv->parsed()) {
            RunConfig cfg = RunConfig::from_file(conv_args.config_path);
            apply_common(cfg, conv_args);
            const auto rows = measure_convergence(
                cfg, parse_dts(dts_list),
                reference == "exact" ? ConvergenceReference::Exact : ConvergenceReference::Fine,
                !serial);
            std::cout << "dt,error,order,max_xi_dev\n" << std::setprecision(6);
            for (const auto& row : rows) {
                std::cout << row.dt << "," << row.error << ",";
                if (std::isnan(row.order))
                    std::cout << "-";
                else
                    std::cout << row.order;
                std::cout << "," << row.max_xi_deviation << "\n";
            }
            const std::string dir = resolve_out_dir(cfg);
            if (!dir.empty()) {
                std::filesystem::create_directories(dir);
                std::ofstream out(dir + "/convergence.csv");
                out << "dt,error,order,max_xi_dev\n" << std::setprecision(17);
                for (const auto& row : rows)
                    out << row.dt << "," << row.error << "," << row.order << ","
                        << row.max_xi_deviation << "\n";
            }
            return 0;
        }
        if (cmd_cmp->parsed()) {
            RunConfig cfg = RunConfig::from_file(cmp_args.config_path);
            apply_common(cfg, cmp_args);
            if (g_list.empty()) g_list = {"tanh:1e4", "pow:1/3", "pow:3", "exp:1e4"};
            const CompareGReport rep = compare_g_variants(cfg, g_list, !serial);
            std::cout << "pairwise relative L2 differences of phi(T):\n" << std::setprecision(4);
            for (size_t i = 0; i < rep.g_names.size(); ++i) {
                for (size_t j = 0; j < rep.g_names.size(); ++j)
                    std::cout << std::setw(12) << rep.pairwise_l2(i, j);
                std::cout << "   " << rep.g_names[i] << "\n";
            }
            std::cout << "max pairwise difference: " << rep.max_pairwise_l2 << "\n";
            std::cout << "max relative energy spread: " << rep.max_energy_spread << "\n";
            return 0;
        }
        CommonArgs& preset_args = cmd_bcp->parsed() ? bcp_args : mbe_args;
        RunConfig cfg = cmd_bcp->parsed() ? bcp_defaults() : mbe_defaults();
        if (!preset_args.config_path.empty()) apply_file(cfg, preset_args.config_path);
        apply_common(cfg, preset_args);
        return do_run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
