#ifndef LAMDD_ANALYSIS_HPP
#define LAMDD_ANALYSIS_HPP

#include "lamdd/arclength.hpp"

namespace lamdd {

struct GlobalCurveRow {
    double time = 0.0;
    double prescribed = 0.0; // amplitude times the loaded-part magnitude
    double reaction = 0.0;   // work-conjugate resultant on the reaction part
    double e_dissi = 0.0;
    double lambda = 0.0;
};

struct DamageMapRow {
    double x = 0.0, y = 0.0;
    int interface_id = 0;
    double d = 0.0, y_hist = 0.0;
};

struct RunResult {
    std::vector<StepRecord> records;
    std::vector<GlobalCurveRow> curve;
    AnalysisState state; // final committed state
    long total_solver_iters = 0;
    long total_controller_iters = 0;
    std::vector<TraceRow> latin_trace;
    std::vector<std::pair<int, ArcTraceRow>> arc_trace; // (step index, row)
};

inline Vec2 reaction_direction(const SubstructuredModel& model)
{
    for (const auto& f : model.interfaces)
        if (f.part == model.reaction_part && f.bc_unit.norm() > 0.0) return f.bc_unit.normalized();
    return Vec2(0.0, 1.0);
}

inline double reaction_magnitude(const SubstructuredModel& model)
{
    for (const auto& f : model.interfaces)
        if (f.part == model.reaction_part && f.bc_unit.norm() > 0.0) return f.bc_unit.norm();
    return 1.0;
}

inline std::vector<DamageMapRow> damage_map(const SubstructuredModel& model, const DamageHistory& h)
{
    std::vector<DamageMapRow> rows;
    for (const auto& f : model.interfaces) {
        if (f.cohesive_index < 0) continue;
        const auto& slot = h[static_cast<std::size_t>(f.cohesive_index)];
        for (int g = 0; g < f.ngp(); ++g) {
            const std::size_t k = static_cast<std::size_t>(g);
            rows.push_back({f.points[k].x(), f.points[k].y(), f.id, slot[k].d, slot[k].y_hist});
        }
    }
    return rows;
}

/// Drives one full analysis in the scenario's solve mode. Steps never
/// cross a load-direction change; rejected controller trials leave the
/// committed history untouched.
inline RunResult run_analysis(const SubstructuredModel& model, const LatinSolver& solver)
{
    const SolverParams& prm = model.solver;
    const bool arc = prm.mode == SolveMode::arclength_fixed || prm.mode == SolveMode::arclength_controlled;
    const bool controlled = prm.mode == SolveMode::controlled || prm.mode == SolveMode::arclength_controlled;
    const double T = model.program.end_time();

    RunResult rr;
    rr.state = AnalysisState::initial(model);
    AnalysisState& state = rr.state;

    const Vec2 rdir = reaction_direction(model);
    const double rmag = reaction_magnitude(model);
    rr.curve.push_back({state.current.time, state.current.amplitude * rmag, 0.0, 0.0, 0.0});

    const int max_steps = 100000;
    int step_index = 0;
    while (T - state.current.time > 1e-9 * std::max(1.0, std::abs(T))) {
        if (++step_index > max_steps) throw solver_error("run_analysis: step limit exceeded");
        const double t_n = state.current.time;

        StepSolveFn solve;
        SubTimeFn subtimes;
        double cap, floor_;
        if (!arc) {
            cap = std::min(prm.dt_max, model.program.next_break(t_n) - t_n);
            cap = std::min(cap, T - t_n);
            floor_ = std::min(prm.dt_min, cap);
            solve = [&](double dt) {
                const double amp = model.program.amplitude(t_n + dt);
                LatinResult lr = solver.solve_time_point(amp, state.committed, &state.current.fields,
                                                         prm.nu_iter_target, prm.max_latin_iters,
                                                         t_n + dt);
                StepSolveOut out;
                out.fields = std::move(lr.s);
                out.working = std::move(lr.working);
                out.amplitude = amp;
                out.lambda = amp;
                out.iterations = lr.iterations;
                out.converged = lr.converged;
                out.nu_iter = lr.nu_final;
                out.trace = std::move(lr.trace);
                return out;
            };
            subtimes = [&](double dt, const StepSolveOut&) {
                SubTimeWeights sw;
                const int ns = prm.ns;
                const double g0 = model.program.amplitude(t_n);
                const double g1 = model.program.amplitude(t_n + dt);
                const double dg = g1 - g0;
                for (int i = 0; i <= ns; ++i) {
                    const double tb = t_n + dt * static_cast<double>(i) / ns;
                    const double gb = model.program.amplitude(tb);
                    double w = dg != 0.0 ? (gb - g0) / dg : static_cast<double>(i) / ns;
                    w = std::min(1.0, std::max(0.0, w));
                    sw.tbar.push_back(tb);
                    sw.w.push_back(w);
                    sw.amp.push_back(gb);
                }
                return sw;
            };
        } else {
            cap = std::min(prm.dl_max, T - t_n);
            floor_ = std::min(prm.dl_min, cap);
            solve = [&](double dl) {
                ArcOptions ao;
                ao.nu_target = prm.nu_iter_target;
                ao.frozen_nu_target =
                    prm.frozen_nu_target > 0.0 ? prm.frozen_nu_target : 0.1 * prm.nu_iter_target;
                ao.max_latin_iters = prm.max_latin_iters;
                ao.control_tol = prm.arc_control_tol;
                ao.max_newton = prm.max_newton_iters;
                StepSolveOut out;
                try {
                    ArcResult ar = solve_unstable_step(solver, state, dl, ao);
                    out.fields = std::move(ar.fields);
                    out.working = std::move(ar.working);
                    out.amplitude = ar.lambda;
                    out.lambda = ar.lambda;
                    out.iterations = ar.latin_iterations;
                    out.converged = ar.converged;
                    out.nu_iter = ar.nu_final;
                    for (const auto& row : ar.trace) rr.arc_trace.emplace_back(step_index, row);
                } catch (const arc_degenerate_error&) {
                    out.converged = false; // controller bisects the arc length
                } catch (const solver_error&) {
                    out.converged = false; // a prediction solve failed at this step size
                }
                return out;
            };
            subtimes = [&](double dl, const StepSolveOut& out) {
                SubTimeWeights sw;
                const int ns = prm.ns;
                const double l0 = state.current.lambda;
                for (int i = 0; i <= ns; ++i) {
                    const double w = static_cast<double>(i) / ns;
                    sw.tbar.push_back(t_n + dl * w);
                    sw.w.push_back(w);
                    sw.amp.push_back((1.0 - w) * l0 + w * out.lambda);
                }
                return sw;
            };
        }

        StepOutcome oc;
        if (controlled) {
            ControllerParams cp;
            cp.nu_target = prm.nu_time_target;
            cp.band_lo = prm.band_lo;
            cp.dt_floor = floor_;
            cp.dt_cap = cap;
            cp.dt_guess = state.prev_dt > 0.0 ? state.prev_dt : (arc ? prm.dl : prm.dt_initial);
            cp.max_iters = prm.max_controller_iters;
            oc = adapt_step(model, state, solve, subtimes, cp);
        } else {
            const double dt = std::min(arc ? prm.dl : prm.dt_initial, cap);
            oc = fixed_step(model, state, solve, subtimes, dt);
        }

        rr.total_solver_iters += oc.record.solver_iters;
        rr.total_controller_iters += oc.record.controller_iters;
        commit(state, oc);
        rr.records.push_back(oc.record);
        const double reaction = part_reaction(model, state.current.fields, model.reaction_part).dot(rdir);
        rr.curve.push_back({state.current.time, state.current.amplitude * rmag, reaction,
                            state.e_dissi, state.current.lambda});
    }
    return rr;
}

inline RunResult run_analysis(const SubstructuredModel& model)
{
    LatinSolver solver(model);
    return run_analysis(model, solver);
}

} // namespace lamdd

#endif // LAMDD_ANALYSIS_HPP
