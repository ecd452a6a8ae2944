// Batch front-end: run scenarios, sweep time-error thresholds, emit CSV
// results and a JSON run manifest.

#include "lamdd/lamdd.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

uint64_t fnv1a(const std::string& s)
{
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Overrides {
    std::string mode;
    double nu_iter_target = -1.0;
    double nu_time_target = -1.0;
    int ns = -1;
    double fixed_dt = -1.0;
    double fixed_dl = -1.0;
    int threads = -1;

    json applied;

    void apply(lamdd::Scenario& sc)
    {
        if (!mode.empty()) {
            sc.solver.mode = lamdd::detail::parse_mode(mode);
            applied["mode"] = mode;
        }
        if (nu_iter_target > 0.0) {
            sc.solver.nu_iter_target = nu_iter_target;
            applied["nu_iter_target"] = nu_iter_target;
        }
        if (nu_time_target > 0.0) {
            sc.solver.nu_time_target = nu_time_target;
            applied["nu_time_target"] = nu_time_target;
        }
        if (ns > 1) {
            sc.solver.ns = ns;
            applied["ns"] = ns;
        }
        if (fixed_dt > 0.0) {
            sc.solver.dt_initial = fixed_dt;
            sc.solver.mode = lamdd::SolveMode::fixed_increment;
            applied["fixed_dt"] = fixed_dt;
        }
        if (fixed_dl > 0.0) {
            sc.solver.dl = fixed_dl;
            sc.solver.mode = lamdd::SolveMode::arclength_fixed;
            applied["fixed_dl"] = fixed_dl;
        }
        if (threads > 0) {
            sc.solver.threads = threads;
            applied["threads"] = threads;
        }
    }
};

const char* mode_name(lamdd::SolveMode m)
{
    switch (m) {
    case lamdd::SolveMode::fixed_increment: return "fixed_increment";
    case lamdd::SolveMode::controlled: return "controlled";
    case lamdd::SolveMode::arclength_fixed: return "arclength_fixed";
    case lamdd::SolveMode::arclength_controlled: return "arclength_controlled";
    }
    return "?";
}

void write_manifest_atomic(const std::string& dir, const json& j)
{
    namespace fs = std::filesystem;
    const fs::path tmp = fs::path(dir) / "manifest.json.tmp";
    const fs::path final_path = fs::path(dir) / "manifest.json";
    {
        std::ofstream out(tmp);
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, final_path);
}

int run_one(const std::string& config_path, const std::string& out_dir, Overrides ovr)
{
    const std::string text = read_file(config_path);
    lamdd::Scenario sc = lamdd::load_scenario(text);
    ovr.apply(sc);

    const auto t0 = std::chrono::steady_clock::now();
    lamdd::RunResult rr = lamdd::run_analysis(lamdd::build_model(sc));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(out_dir);
    const lamdd::SubstructuredModel model = lamdd::build_model(sc);
    const auto files = lamdd::write_run_outputs(out_dir, model, rr);

    json manifest;
    manifest["config"] = config_path;
    manifest["config_hash"] = hex64(fnv1a(text));
    manifest["mode"] = mode_name(sc.solver.mode);
    manifest["nu_iter_target"] = sc.solver.nu_iter_target;
    manifest["nu_time_target"] = sc.solver.nu_time_target;
    manifest["ns"] = sc.solver.ns;
    manifest["steps"] = rr.records.size();
    manifest["wall_time_s"] = wall;
    manifest["solver_iters_total"] = rr.total_solver_iters;
    manifest["controller_iters_total"] = rr.total_controller_iters;
    manifest["e_dissi_end"] = rr.state.e_dissi;
    manifest["outputs"] = files;
    manifest["overrides"] = ovr.applied.is_null() ? json::object() : ovr.applied;
    write_manifest_atomic(out_dir, manifest);

    std::cout << "run: " << rr.records.size() << " steps, E_dissi = " << rr.state.e_dissi
              << ", wall " << wall << " s -> " << out_dir << '\n';
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_dir,
              const std::vector<double>& targets, Overrides base, bool parallel)
{
    if (targets.size() < 2) {
        std::cerr << "sweep: need at least 2 threshold values\n";
        return 2;
    }
    std::filesystem::create_directories(out_dir);
    struct Row {
        double nu_d;
        long steps = -1;
        double e_dissi = 0.0;
        double wall = 0.0;
        bool ok = false;
    };
    std::vector<Row> rows(targets.size());

    auto one = [&](std::size_t i) {
        Row& row = rows[i];
        row.nu_d = targets[i];
        char sub[64];
        std::snprintf(sub, sizeof(sub), "nu_%g", targets[i]);
        const std::string dir = (std::filesystem::path(out_dir) / sub).string();
        Overrides ovr = base;
        ovr.nu_time_target = targets[i];
        ovr.mode = ovr.mode.empty() && ovr.fixed_dl < 0 && ovr.fixed_dt < 0 ? "" : ovr.mode;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            const std::string text = read_file(config_path);
            lamdd::Scenario sc = lamdd::load_scenario(text);
            ovr.apply(sc);
            lamdd::RunResult rr = lamdd::run_analysis(lamdd::build_model(sc));
            row.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.steps = static_cast<long>(rr.records.size());
            row.e_dissi = rr.state.e_dissi;
            row.ok = true;
            const lamdd::SubstructuredModel model = lamdd::build_model(sc);
            lamdd::write_run_outputs(dir, model, rr);
        } catch (const std::exception& e) {
            std::cerr << "sweep value " << targets[i] << " failed: " << e.what() << '\n';
        }
    };

    if (parallel) {
        lamdd::parallel_for(targets.size(), static_cast<int>(targets.size()), one);
    } else {
        for (std::size_t i = 0; i < targets.size(); ++i) one(i);
    }

    const std::string summary = (std::filesystem::path(out_dir) / "sweep.csv").string();
    {
        std::ofstream out(summary);
        out << "nu_time_target,steps,e_dissi,wall_time_s,ok\n";
        for (const auto& r : rows)
            out << lamdd::fmt(r.nu_d) << ',' << r.steps << ',' << lamdd::fmt(r.e_dissi) << ','
                << lamdd::fmt(r.wall) << ',' << (r.ok ? 1 : 0) << '\n';
    }
    std::cout << "sweep summary -> " << summary << '\n';
    for (const auto& r : rows)
        if (!r.ok) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"quasi-static delamination solver with adaptive load increments"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    Overrides ovr;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("config", config_path, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--mode", ovr.mode, "fixed_increment|controlled|arclength_fixed|arclength_controlled");
    run->add_option("--nu-iter-target", ovr.nu_iter_target, "solver convergence threshold");
    run->add_option("--nu-time-target", ovr.nu_time_target, "time-error threshold");
    run->add_option("--ns", ovr.ns, "sub-intervals per step");
    run->add_option("--fixed-dt", ovr.fixed_dt, "fixed time increment (implies fixed_increment)");
    run->add_option("--fixed-dl", ovr.fixed_dl, "fixed arc length (implies arclength_fixed)");
    run->add_option("--threads", ovr.threads, "worker threads");

    std::vector<double> sweep_targets;
    bool sweep_parallel = false;
    auto* sweep = app.add_subcommand("sweep", "run one scenario for several nu_time targets");
    sweep->add_option("config", config_path, "scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--nu-time-targets", sweep_targets, "comma separated thresholds")
        ->required()
        ->delimiter(',');
    sweep->add_flag("--parallel", sweep_parallel, "run the sweep values concurrently");
    sweep->add_option("--threads", ovr.threads, "worker threads per run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the usage message
        return 2;
    }

    try {
        if (run->parsed()) return run_one(config_path, out_dir, ovr);
        return run_sweep(config_path, out_dir, sweep_targets, ovr, sweep_parallel);
    } catch (const lamdd::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
