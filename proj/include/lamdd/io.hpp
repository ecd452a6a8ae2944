#ifndef LAMDD_IO_HPP
#define LAMDD_IO_HPP

#include "lamdd/analysis.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace lamdd {

/// 17 significant digits: doubles round-trip exactly through the CSVs.
inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_steps_csv(const std::string& path, const std::vector<StepRecord>& records)
{
    std::ofstream out(path);
    out << "t_n,t_np1,dt,k_controller,nu_time_dd,nu_iter_final,e_dissi,lambda,solver_iters,flag\n";
    for (const auto& r : records) {
        out << fmt(r.t_n) << ',' << fmt(r.t_np1) << ',' << fmt(r.dt) << ',' << r.controller_iters
            << ',' << fmt(r.nu_time) << ',' << fmt(r.nu_iter_final) << ',' << fmt(r.e_dissi_end)
            << ',' << fmt(r.lambda) << ',' << r.solver_iters << ',' << r.flag << '\n';
    }
}

/// Reads steps.csv back into records (the columns it carries).
inline std::vector<StepRecord> read_steps_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<StepRecord> out;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cols = ConfigDoc::split(line, ',');
        if (cols.size() != 10) throw std::runtime_error("steps.csv: bad row '" + line + "'");
        StepRecord r;
        r.t_n = std::stod(cols[0]);
        r.t_np1 = std::stod(cols[1]);
        r.dt = std::stod(cols[2]);
        r.controller_iters = std::stoi(cols[3]);
        r.nu_time = std::stod(cols[4]);
        r.nu_iter_final = std::stod(cols[5]);
        r.e_dissi_end = std::stod(cols[6]);
        r.lambda = std::stod(cols[7]);
        r.solver_iters = std::stoi(cols[8]);
        r.flag = cols[9];
        r.accepted = true;
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_subtime_csv(const std::string& path, const std::vector<StepRecord>& records)
{
    std::ofstream out(path);
    out << "step,tbar,nu_interp_dd\n";
    for (std::size_t s = 0; s < records.size(); ++s) {
        const auto& r = records[s];
        const std::size_t n = r.nu_interp.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double tb = n > 1 ? r.t_n + (r.t_np1 - r.t_n) * static_cast<double>(i) /
                                                static_cast<double>(n - 1)
                                    : r.t_n;
            out << s << ',' << fmt(tb) << ',' << fmt(r.nu_interp[i]) << '\n';
        }
    }
}

inline void write_global_curve_csv(const std::string& path, const std::vector<GlobalCurveRow>& rows)
{
    std::ofstream out(path);
    out << "time,prescribed,reaction,e_dissi,lambda\n";
    for (const auto& r : rows)
        out << fmt(r.time) << ',' << fmt(r.prescribed) << ',' << fmt(r.reaction) << ','
            << fmt(r.e_dissi) << ',' << fmt(r.lambda) << '\n';
}

inline void write_damage_map_csv(const std::string& path, const std::vector<DamageMapRow>& rows)
{
    std::ofstream out(path);
    out << "x,y,interface_id,d,y_hist\n";
    for (const auto& r : rows)
        out << fmt(r.x) << ',' << fmt(r.y) << ',' << r.interface_id << ',' << fmt(r.d) << ','
            << fmt(r.y_hist) << '\n';
}

inline void write_latin_trace_csv(const std::string& path, const std::vector<TraceRow>& rows)
{
    std::ofstream out(path);
    out << "time,iteration,nu_iter,perfect_force,perfect_gap,cohesive_a,cohesive_b,neumann,"
           "dirichlet,contact_force,contact_gap,contact_traction_a,contact_traction_b\n";
    for (const auto& r : rows) {
        out << fmt(r.time) << ',' << r.iteration << ',' << fmt(r.nu);
        for (double v : r.family_ratio2) out << ',' << fmt(std::sqrt(v));
        out << '\n';
    }
}

inline void write_arc_trace_csv(const std::string& path,
                                const std::vector<std::pair<int, ArcTraceRow>>& rows)
{
    std::ofstream out(path);
    out << "step,iteration,lambda,control_value,nu_iter\n";
    for (const auto& [step, r] : rows)
        out << step << ',' << r.iteration << ',' << fmt(r.lambda) << ',' << fmt(r.control) << ','
            << fmt(r.nu) << '\n';
}

/// Writes every run artifact under `dir`; returns the file list.
inline std::vector<std::string> write_run_outputs(const std::string& dir,
                                                  const SubstructuredModel& model,
                                                  const RunResult& rr)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> files;
    auto emit = [&](const std::string& name) {
        files.push_back(name);
        return (fs::path(dir) / name).string();
    };
    write_steps_csv(emit("steps.csv"), rr.records);
    write_subtime_csv(emit("subtime_indicator.csv"), rr.records);
    write_global_curve_csv(emit("global_curve.csv"), rr.curve);
    {
        char name[64];
        std::snprintf(name, sizeof(name), "damage_map_%.9g.csv", rr.state.current.time);
        write_damage_map_csv(emit(name), damage_map(model, rr.state.committed));
    }
    if (!rr.latin_trace.empty()) write_latin_trace_csv(emit("latin_trace.csv"), rr.latin_trace);
    if (!rr.arc_trace.empty()) write_arc_trace_csv(emit("arc_trace.csv"), rr.arc_trace);
    return files;
}

} // namespace lamdd

#endif // LAMDD_IO_HPP
