// CLI entry point. Parsing and config merging live here; the command
// implementations are header-level so tests can drive them directly.

#include <hardylab/driver.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <set>
#include <iostream>
#include <string>

namespace {

struct FlagSet {
    CLI::Option* n = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* R = nullptr;
    CLI::Option* trials = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* eps = nullptr;
    CLI::Option* res = nullptr;
    CLI::Option* depth = nullptr;
    CLI::Option* tol = nullptr;
    CLI::Option* format = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* config = nullptr;
    CLI::Option* quick = nullptr;
};

FlagSet add_common_flags(CLI::App* cmd, hardylab::DriverOptions& opt, std::string& config_path) {
    FlagSet fs;
    fs.n = cmd->add_option("--n", opt.n, "ambient dimension (3..16)");
    fs.k = cmd->add_option("--k", opt.k, "number of positive half-line factors (1..n)");
    fs.R = cmd->add_option("--R", opt.R, "ball radius (default 1)");
    fs.trials = cmd->add_option("--trials", opt.trials, "random trials per check (0: command default)");
    fs.seed = cmd->add_option("--seed", opt.seed, "base seed; every derived stream is a pure function of it");
    fs.eps = cmd->add_option("--eps-list", opt.eps_list, "epsilon sweep, comma separated")->delimiter(',');
    fs.res = cmd->add_option("--resolutions", opt.resolutions, "grid resolutions, comma separated")
                 ->delimiter(',');
    fs.depth = cmd->add_option("--depth", opt.depth, "number of logarithmic remainder terms");
    fs.tol = cmd->add_option("--tol", opt.tol, "margin tolerance (0: automatic per check)");
    fs.format = cmd->add_option("--format", opt.format, "output format for --out")
                    ->check(CLI::IsMember({"json", "csv"}));
    fs.out = cmd->add_option("--out", opt.out, "write the run record to this path");
    fs.config = cmd->add_option("--config", config_path, "config file; explicit flags win");
    fs.quick = cmd->add_flag("--quick", opt.quick, "reduced battery sized for fast runs");
    return fs;
}

std::set<std::string> config_keys() {
    return {"n",     "k",   "R",      "trials", "seed", "eps-list",
            "resolutions", "depth", "tol", "format", "out",  "quick"};
}

void merge_config(const FlagSet& fs, const std::string& path, hardylab::DriverOptions& opt) {
    if (path.empty()) return;
    const hardylab::Config cfg = hardylab::load_config(path, config_keys());
    opt.config_warnings = cfg.warnings;
    if (!fs.n->count() && cfg.has("n")) opt.n = static_cast<int>(cfg.get_integer("n", opt.n));
    if (!fs.k->count() && cfg.has("k")) opt.k = static_cast<int>(cfg.get_integer("k", opt.k));
    if (!fs.R->count() && cfg.has("R")) opt.R = cfg.get_number("R", opt.R);
    if (!fs.trials->count() && cfg.has("trials"))
        opt.trials = static_cast<int>(cfg.get_integer("trials", opt.trials));
    if (!fs.seed->count() && cfg.has("seed"))
        opt.seed = static_cast<std::uint64_t>(cfg.get_integer("seed", (long long)opt.seed));
    if (!fs.eps->count() && cfg.has("eps-list")) {
        opt.eps_list.clear();
        for (const std::string& s : cfg.get_list("eps-list")) opt.eps_list.push_back(std::stod(s));
    }
    if (!fs.res->count() && cfg.has("resolutions")) {
        opt.resolutions.clear();
        for (const std::string& s : cfg.get_list("resolutions")) opt.resolutions.push_back(std::stoi(s));
    }
    if (!fs.depth->count() && cfg.has("depth"))
        opt.depth = static_cast<int>(cfg.get_integer("depth", opt.depth));
    if (!fs.tol->count() && cfg.has("tol")) opt.tol = cfg.get_number("tol", opt.tol);
    if (!fs.format->count() && cfg.has("format")) opt.format = cfg.get_string("format", opt.format);
    if (!fs.out->count() && cfg.has("out")) opt.out = cfg.get_string("out", opt.out);
    if (!fs.quick->count() && cfg.has("quick")) opt.quick = cfg.get_flag("quick", opt.quick);
    if (cfg.has("k")) opt.k_given = opt.k_given || !fs.k->count();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hardylab: numerical verification of sharp Hardy constants on cones "
                 "R^{n-k} x (R_+)^k"};
    app.require_subcommand(1);

    hardylab::DriverOptions opt;
    std::string config_path;

    struct Entry {
        CLI::App* cmd;
        FlagSet flags;
        hardylab::CommandResult (*run)(const hardylab::DriverOptions&);
    };
    std::vector<Entry> entries;
    auto add = [&](const char* name, const char* help,
                   hardylab::CommandResult (*run)(const hardylab::DriverOptions&)) {
        CLI::App* cmd = app.add_subcommand(name, help);
        entries.push_back({cmd, add_common_flags(cmd, opt, config_path), run});
    };

    add("constants", "exact constants and the rational split identity", hardylab::run_constants);
    add("verify-hardy", "energy vs constant times the Hardy term over a trial suite",
        hardylab::run_verify_hardy);
    add("verify-weighted", "weighted half-space inequality for l in {1/2, 1, 3/2, 2}",
        hardylab::run_verify_weighted);
    add("verify-ft", "inequality with iterated-log remainder terms", hardylab::run_verify_ft);
    add("sharpness", "minimizing family quotient sweep and extrapolation", hardylab::run_sharpness);
    add("eigen", "principal eigenvalue of the spherical section at n = 3", hardylab::run_eigen);
    add("decompose", "low-degree vanishing, moments, and energy doubling", hardylab::run_decompose);
    add("identities", "finite-difference checks of the pointwise identities",
        hardylab::run_identities);
    add("all", "full verification battery", hardylab::run_all);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        for (const Entry& entry : entries) {
            if (!entry.cmd->parsed()) continue;
            merge_config(entry.flags, config_path, opt);
            opt.k_given = opt.k_given || entry.flags.k->count() > 0;
            const auto start = std::chrono::steady_clock::now();
            hardylab::CommandResult res = entry.run(opt);
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return hardylab::finalize_command(std::move(res), opt, wall, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
