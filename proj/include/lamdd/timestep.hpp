#ifndef LAMDD_TIMESTEP_HPP
#define LAMDD_TIMESTEP_HPP

#include "lamdd/latin.hpp"

#include <limits>

namespace lamdd {

/// Interpolation data for the sub-times of one step: field weight on
/// s_{n+1} and boundary amplitude at each sub-time. Index 0 is t_n and
/// index N_s is t_{n+1}.
struct SubTimeWeights {
    std::vector<double> w;
    std::vector<double> amp;
    std::vector<double> tbar;
};

/// Intermediate fields at a sub-time: endpoint-consistent convex
/// combination (weight w on s_{n+1}).
inline Fields interpolate(const Fields& s_n, const Fields& s_np1, double w)
{
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("interpolate: weight outside [0, 1]");
    if (w == 0.0) return s_n;
    if (w == 1.0) return s_np1;
    return combine(s_n, s_np1, w);
}

/// Damage trajectory reconstructed from the continuous history of the
/// interpolated jumps over one step.
struct Reconstruction {
    // damage per sub-time, per cohesive interface, per Gauss point
    std::vector<std::vector<std::vector<double>>> d;
    DamageHistory committed_end; // history through t_{n+1} from the reconstruction
    double delta_e = 0.0;        // dissipated energy increment over the step
};

inline Reconstruction reconstruct_history(const SubstructuredModel& model, const Fields& s_n,
                                          const Fields& s_np1, const SubTimeWeights& sw,
                                          const DamageHistory& committed)
{
    const std::size_t ns1 = sw.w.size();
    Reconstruction rec;
    rec.d.assign(ns1, std::vector<std::vector<double>>(static_cast<std::size_t>(model.num_cohesive)));
    rec.committed_end = committed;

    for (const auto& f : model.interfaces) {
        if (f.cohesive_index < 0) continue;
        const std::size_t ci = static_cast<std::size_t>(f.cohesive_index);
        const std::size_t ngp = static_cast<std::size_t>(f.ngp());
        for (std::size_t i = 0; i < ns1; ++i) rec.d[i][ci].resize(ngp);
        const InterfaceField& fa = s_n.iface[static_cast<std::size_t>(f.id)];
        const InterfaceField& fb = s_np1.iface[static_cast<std::size_t>(f.id)];
        for (std::size_t g = 0; g < ngp; ++g) {
            const Jump j0 = jump_at(f, fa, static_cast<int>(g));
            const Jump j1 = jump_at(f, fb, static_cast<int>(g));
            double y_run = committed[ci][g].y_hist;
            double d_prev = 0.0, sum_prev = 0.0;
            double e_gp = 0.0;
            for (std::size_t i = 0; i < ns1; ++i) {
                const double w = sw.w[i];
                const Jump j{(1.0 - w) * j0.dn + w * j1.dn, (1.0 - w) * j0.dt1 + w * j1.dt1, 0.0};
                const Vec3 y = thermo_forces(j, model.cohesive);
                y_run = std::max(y_run, coupled_force(y[0], y[1], y[2], model.cohesive));
                const double d = damage_of(y_run, model.cohesive);
                rec.d[i][ci][g] = d;
                const double sum = y[0] + y[1] + y[2];
                if (i > 0) e_gp += 0.5 * (sum + sum_prev) * (d - d_prev);
                d_prev = d;
                sum_prev = sum;
            }
            rec.committed_end[ci][g] = DamageState{damage_of(y_run, model.cohesive), y_run};
            rec.delta_e += f.weights[g] * e_gp;
        }
    }
    return rec;
}

/// nu^interp,dd at one sub-time: the nu^iter formulas evaluated on the
/// interpolated fields with the cohesive operators rebuilt from the
/// reconstructed continuous history. Interface-local integrals only; no
/// linear solve is performed.
inline double nu_interp_dd(const SubstructuredModel& model, const Fields& interp_fields,
                           double amplitude, const std::vector<std::vector<double>>& damage_at_tbar)
{
    const LawView law = make_reconstructed_law(model, damage_at_tbar);
    return nu_ecl(model, interp_fields, amplitude, law).nu;
}

/// nu^time,dd = max over the sub-time samples.
inline double nu_time_dd(const std::vector<double>& nu_interp)
{
    double m = 0.0;
    for (double v : nu_interp) m = std::max(m, v);
    return m;
}

/// One accepted (or probed) time step.
struct StepRecord {
    double t_n = 0.0, t_np1 = 0.0, dt = 0.0;
    std::vector<double> nu_interp; // N_s + 1 samples
    double nu_time = 0.0;
    int controller_iters = 0;
    int solver_iters = 0;
    bool accepted = false;
    std::string flag; // "", "capped", "dt_min", "max_iters", "over_target", "stalled"
    double e_dissi_end = 0.0;
    double lambda = 0.0;
    double amplitude = 0.0;
    double nu_iter_final = 0.0;
    int fallback_count = 0;
};

/// Nonlinear solve output at a trial t_{n+1}, produced by the stable or
/// arc-length driver.
struct StepSolveOut {
    Fields fields;
    DamageHistory working;
    double amplitude = 0.0;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double nu_iter = 0.0;
    std::vector<TraceRow> trace;
};

using StepSolveFn = std::function<StepSolveOut(double dt)>;
using SubTimeFn = std::function<SubTimeWeights(double dt, const StepSolveOut& out)>;

/// Time-increment prediction for the quasi-Newton controller: secant on
/// the last two (dt, nu) samples; square-root fallback whenever the secant
/// is unavailable or predicts a non-positive increment.
struct DtPrediction {
    double dt = 0.0;
    bool fallback = false;
};

inline DtPrediction predict_dt(const std::vector<std::pair<double, double>>& samples, double nu_target)
{
    const double dtk = samples.back().first;
    const double nuk = samples.back().second;
    if (samples.size() >= 2) {
        const double dtm = samples[samples.size() - 2].first;
        const double num = samples[samples.size() - 2].second;
        const double dnu = nuk - num;
        if (dnu != 0.0) {
            const double dt_next = dtm + (nu_target - num) / dnu * (dtk - dtm);
            if (dt_next > 0.0) return {dt_next, false};
        }
    }
    if (nuk <= 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {std::sqrt(nu_target / nuk) * dtk, true};
}

/// Committed interface history plus the converged solution at t_n.
struct AnalysisState {
    DamageHistory committed;
    Snapshot current;
    double e_dissi = 0.0;
    double prev_dt = 0.0;
    Fields prev_fields; // accepted solution at t_{n-1} (arc-length predictor)
    bool has_prev = false;

    static AnalysisState initial(const SubstructuredModel& model)
    {
        AnalysisState st;
        st.committed = zero_history(model);
        st.current = Snapshot::zero(model);
        st.current.time = model.program.points.empty() ? 0.0 : model.program.points.front().t;
        st.current.amplitude = model.program.amplitude(st.current.time);
        return st;
    }
};

/// One full evaluation of a trial step: nonlinear solve, history
/// reconstruction over the sub-times and the indicator samples.
struct StepSample {
    StepSolveOut out;
    Reconstruction recon;
    std::vector<double> nu_interp;
    double nu_time = 0.0;
    double dt = 0.0;
};

inline StepSample evaluate_step(const SubstructuredModel& model, const AnalysisState& state,
                                const StepSolveFn& solve, const SubTimeFn& subtimes, double dt)
{
    StepSample smp;
    smp.dt = dt;
    smp.out = solve(dt);
    if (!smp.out.converged) return smp;
    const SubTimeWeights sw = subtimes(dt, smp.out);
    smp.recon = reconstruct_history(model, state.current.fields, smp.out.fields, sw, state.committed);
    smp.nu_interp.resize(sw.w.size());
    for (std::size_t i = 0; i < sw.w.size(); ++i) {
        const Fields fi = interpolate(state.current.fields, smp.out.fields, sw.w[i]);
        smp.nu_interp[i] = nu_interp_dd(model, fi, sw.amp[i], smp.recon.d[i]);
    }
    smp.nu_time = nu_time_dd(smp.nu_interp);
    return smp;
}

struct StepOutcome {
    StepRecord record;
    Snapshot snapshot;
    Reconstruction recon;
    bool committed = false;
};

namespace detail {

inline StepOutcome make_outcome(const AnalysisState& state, const StepSample& smp, int k_controller,
                                int fallbacks, const std::string& flag)
{
    StepOutcome oc;
    oc.record.t_n = state.current.time;
    oc.record.dt = smp.dt;
    oc.record.t_np1 = state.current.time + smp.dt;
    oc.record.nu_interp = smp.nu_interp;
    oc.record.nu_time = smp.nu_time;
    oc.record.controller_iters = k_controller;
    oc.record.solver_iters = smp.out.iterations;
    oc.record.accepted = true;
    oc.record.flag = flag;
    oc.record.e_dissi_end = state.e_dissi + smp.recon.delta_e;
    oc.record.lambda = smp.out.lambda;
    oc.record.amplitude = smp.out.amplitude;
    oc.record.nu_iter_final = smp.out.nu_iter;
    oc.record.fallback_count = fallbacks;

    oc.snapshot.time = oc.record.t_np1;
    oc.snapshot.amplitude = smp.out.amplitude;
    oc.snapshot.lambda = smp.out.lambda;
    oc.snapshot.fields = smp.out.fields;
    oc.snapshot.working = smp.out.working;
    oc.snapshot.e_dissi = oc.record.e_dissi_end;
    oc.recon = smp.recon;
    return oc;
}

} // namespace detail

struct ControllerParams {
    double nu_target = 0.0; // nu_d^{time,dd}
    double band_lo = 0.5;
    double dt_floor = 0.0;
    double dt_cap = 0.0;
    double dt_guess = 0.0;
    int max_iters = 6;
};

/// The adaptive load-increment loop: predict dt, solve the full nonlinear
/// problem at t_n + dt, measure nu^time,dd, repeat until it falls in the
/// acceptance band. Rejected trials never touch the committed history.
inline StepOutcome adapt_step(const SubstructuredModel& model, const AnalysisState& state,
                              const StepSolveFn& solve, const SubTimeFn& subtimes,
                              const ControllerParams& prm)
{
    const double lo = prm.band_lo * prm.nu_target;
    auto clamp = [&](double v) { return std::min(prm.dt_cap, std::max(prm.dt_floor, v)); };
    double dt = clamp(prm.dt_guess);

    std::vector<std::pair<double, double>> samples;
    int fallbacks = 0;

    // best candidate below target (largest nu), and overall smallest nu
    bool have_best = false, have_min = false;
    StepSample best, minsmp;
    int best_k = 0, min_k = 0;

    for (int k = 1; k <= prm.max_iters; ++k) {
        StepSample smp = evaluate_step(model, state, solve, subtimes, dt);
        if (!smp.out.converged) {
            if (k == prm.max_iters)
                throw solver_error("step at t = " + std::to_string(state.current.time) +
                                   ": nonlinear solver did not converge (dt = " + std::to_string(dt) + ")");
            dt = clamp(0.5 * dt);
            continue;
        }
        samples.emplace_back(dt, smp.nu_time);
        if (smp.nu_time <= prm.nu_target && (!have_best || smp.nu_time > best.nu_time)) {
            best = smp;
            best_k = k;
            have_best = true;
        }
        if (!have_min || smp.nu_time < minsmp.nu_time) {
            minsmp = smp;
            min_k = k;
            have_min = true;
        }

        const bool at_cap = dt >= prm.dt_cap * (1.0 - 1e-12);
        const bool at_floor = dt <= prm.dt_floor * (1.0 + 1e-12);
        if (smp.nu_time <= prm.nu_target && smp.nu_time >= lo)
            return detail::make_outcome(state, smp, k, fallbacks, "");
        if (smp.nu_time <= prm.nu_target && at_cap)
            return detail::make_outcome(state, smp, k, fallbacks, "capped");
        if (smp.nu_time > prm.nu_target && at_floor)
            return detail::make_outcome(state, smp, k, fallbacks, "dt_min");

        const DtPrediction p = predict_dt(samples, prm.nu_target);
        if (p.fallback) ++fallbacks;
        const double dt_next = clamp(p.dt);
        if (std::abs(dt_next - dt) <= 1e-9 * dt)
            return detail::make_outcome(state, smp, k, fallbacks,
                                        smp.nu_time <= prm.nu_target ? "stalled" : "over_target");
        dt = dt_next;
    }

    if (have_best) return detail::make_outcome(state, best, best_k, fallbacks, "max_iters");
    if (have_min) return detail::make_outcome(state, minsmp, min_k, fallbacks, "over_target");
    throw solver_error("adaptive step controller: no converged sample");
}

/// Fixed-increment step (still records the indicator). An increment that
/// lands on a fold of the equilibrium path is retried at nearby sizes
/// (bisection first, then a larger escape); the next step resumes at the
/// nominal increment.
inline StepOutcome fixed_step(const SubstructuredModel& model, const AnalysisState& state,
                              const StepSolveFn& solve, const SubTimeFn& subtimes, double dt)
{
    static constexpr double retry_scale[] = {1.0, 0.5, 1.5, 0.25, 0.75, 0.125};
    for (int attempt = 0; attempt < 6; ++attempt) {
        StepSample smp = evaluate_step(model, state, solve, subtimes, dt * retry_scale[attempt]);
        if (smp.out.converged)
            return detail::make_outcome(state, smp, attempt + 1, 0, attempt == 0 ? "" : "retried");
    }
    throw solver_error("fixed step at t = " + std::to_string(state.current.time) +
                       ": nonlinear solver did not converge");
}

/// Commits an accepted step: the damage variables computed by the solver
/// at t_{n+1} are discarded in favour of the continuous reconstruction.
/// Idempotent; rejected trials never reach this point.
inline void commit(AnalysisState& state, StepOutcome& outcome)
{
    if (outcome.committed) return;
    state.prev_fields = state.current.fields;
    state.has_prev = true;
    state.committed = outcome.recon.committed_end;
    state.current = outcome.snapshot;
    state.e_dissi = outcome.snapshot.e_dissi;
    state.prev_dt = outcome.record.dt;
    outcome.committed = true;
}

} // namespace lamdd

#endif // LAMDD_TIMESTEP_HPP
