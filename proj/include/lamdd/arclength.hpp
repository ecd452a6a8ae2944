#ifndef LAMDD_ARCLENGTH_HPP
#define LAMDD_ARCLENGTH_HPP

#include "lamdd/timestep.hpp"

namespace lamdd {

/// Raised when the control direction is orthogonal to the load response;
/// the caller bisects the arc-length and retries.
class arc_degenerate_error : public solver_error {
public:
    using solver_error::solver_error;
};

/// The control functional c: a cohesive Gauss point and a frozen unit
/// direction in the local (n, t1) frame. Applied to a field set it
/// extracts that point's jump component along the direction; linear once
/// selected.
struct ControlSelection {
    int iface = -1;
    int gp = -1;
    Vec2 dir = Vec2::Zero(); // (n, t1) components
    double value = 0.0;      // restricted increment magnitude at selection
    bool all_negative = false;

    bool valid() const { return iface >= 0; }
    bool same_point(const ControlSelection& o) const { return iface == o.iface && gp == o.gp; }
};

/// Maximum positive jump increment over all cohesive Gauss points between
/// two field sets (base may be null for increments from zero). The
/// "positive" restriction drops normal-closing contributions. Ties keep
/// the first point in interface order.
inline ControlSelection control_extract(const SubstructuredModel& model, const Fields& s,
                                        const Fields* base)
{
    ControlSelection sel;
    double best_dn = -std::numeric_limits<double>::infinity();
    int best_dn_iface = -1, best_dn_gp = -1;
    for (const auto& f : model.interfaces) {
        if (f.cohesive_index < 0) continue;
        for (int g = 0; g < f.ngp(); ++g) {
            const Jump j1 = jump_at(f, s.iface[static_cast<std::size_t>(f.id)], g);
            Jump j0{};
            if (base) j0 = jump_at(f, base->iface[static_cast<std::size_t>(f.id)], g);
            const double ddn = j1.dn - j0.dn;
            const double ddt = j1.dt1 - j0.dt1;
            const Vec2 restricted(positive_part(ddn), ddt);
            const double m = restricted.norm();
            if (m > sel.value) {
                sel.value = m;
                sel.iface = f.id;
                sel.gp = g;
                sel.dir = restricted / m;
            }
            if (ddn > best_dn) {
                best_dn = ddn;
                best_dn_iface = f.id;
                best_dn_gp = g;
            }
        }
    }
    if (!sel.valid()) {
        // all increments closing: flag and point at the least-negative one
        sel.iface = best_dn_iface;
        sel.gp = best_dn_gp;
        sel.dir = Vec2(1.0, 0.0);
        sel.value = 0.0;
        sel.all_negative = true;
    }
    return sel;
}

/// c applied to a total field set: the selected point's jump projected on
/// the frozen direction.
inline double c_dot(const SubstructuredModel& model, const ControlSelection& sel, const Fields& s)
{
    const Interface& f = model.iface(sel.iface);
    const Jump j = jump_at(f, s.iface[static_cast<std::size_t>(sel.iface)], sel.gp);
    return sel.dir.x() * j.dn + sel.dir.y() * j.dt1;
}

/// Load-amplitude prediction of the modified Newton scheme:
/// lambda = (dl + c(U_tn)) / (c(K^-1 q_ext)).
inline double arc_lambda_prediction(double dl, double c_of_u_tn, double c_of_unit_response)
{
    return (dl + c_of_u_tn) / c_of_unit_response;
}

struct ArcTraceRow {
    int iteration = 0;
    double lambda = 0.0;
    double control = 0.0;
    double nu = 0.0;
};

struct ArcOptions {
    double nu_target = 1e-3;
    double frozen_nu_target = 1e-3;
    int max_newton = 40;
    int max_latin_iters = 3000;
    double control_tol = 1e-8; // relative on c(dU) dU = dl
};

struct ArcResult {
    Fields fields;
    DamageHistory working;
    double lambda = 0.0;
    int newton_iterations = 0;
    int latin_iterations = 0;
    bool converged = false;
    double nu_final = 0.0;
    double control_value = 0.0;
    std::vector<ArcTraceRow> trace;
};

/// One unstable step under prescribed arc-length dl: modified Newton whose
/// predictions solve the damage-frozen substructured problem under the
/// unit load, with lambda set so the maximum positive jump increment
/// equals dl. Convergence is measured with nu^iter on the true laws after
/// each prediction; the control-equation residual is checked separately.
inline ArcResult solve_unstable_step(const LatinSolver& solver, const AnalysisState& state,
                                     double dl, const ArcOptions& opt)
{
    const SubstructuredModel& model = solver.model();
    const DamageHistory& committed = state.committed;
    const Fields& s_n = state.current.fields;

    ArcResult res;
    res.fields = s_n;
    res.lambda = state.current.lambda;

    DamageHistory working = committed;
    FrozenLaws frozen = solver.freeze_laws(s_n, working);
    const LawView true_law = make_iterate_law(model, committed);

    ControlSelection sel;
    if (state.has_prev) sel = control_extract(model, s_n, &state.prev_fields);
    bool sel_from_prev = sel.valid() && sel.value > 0.0;
    bool changed_last = false;

    Fields unit_init = Fields::zero(model);
    bool have_unit_init = false;

    for (int i = 1; i <= opt.max_newton; ++i) {
        const LatinResult unit = solver.solve_frozen(1.0, committed, frozen,
                                                     have_unit_init ? &unit_init : nullptr,
                                                     opt.frozen_nu_target, opt.max_latin_iters);
        res.latin_iterations += unit.iterations;
        if (!unit.converged)
            throw solver_error("arc-length: frozen prediction solve did not converge (newton iteration " +
                               std::to_string(i) + ", nu = " + std::to_string(unit.nu_final) + ")");
        unit_init = unit.s;
        have_unit_init = true;

        if (!sel_from_prev) {
            sel = control_extract(model, unit.s, nullptr);
            if (!sel.valid() || sel.value <= 0.0)
                throw arc_degenerate_error("arc-length: no opening cohesive response to select");
            sel_from_prev = true;
        }

        const double denom = c_dot(model, sel, unit.s);
        const double scale = std::abs(dl) + std::abs(c_dot(model, sel, s_n));
        if (std::abs(denom) <= 1e-14 * std::max(1.0, scale))
            throw arc_degenerate_error("arc-length: control direction orthogonal to the load response");

        const double lambda = arc_lambda_prediction(dl, c_dot(model, sel, s_n), denom);
        Fields s_new = scaled(unit.s, lambda);

        working = solver.working_damage(s_new, committed);
        frozen = solver.freeze_laws(s_new, working);

        const ControlSelection sel_new = control_extract(model, s_new, &s_n);
        const double nu = nu_ecl(model, s_new, lambda, true_law).nu;
        const double ctrl_err = std::abs(sel_new.value - dl);

        res.fields = std::move(s_new);
        res.lambda = lambda;
        res.newton_iterations = i;
        res.nu_final = nu;
        res.control_value = sel_new.value;
        res.trace.push_back({i, lambda, sel_new.value, nu});

        if (nu <= opt.nu_target && ctrl_err <= opt.control_tol * std::abs(dl)) {
            res.converged = true;
            break;
        }

        // Correction: update c. At most one selector change per two
        // iterations to avoid cycling between Gauss points.
        if (sel_new.valid() && !sel_new.all_negative) {
            const bool changes = !sel_new.same_point(sel);
            if (changes && changed_last) {
                changed_last = false; // keep the previous selector this time
            } else {
                sel = sel_new;
                changed_last = changes;
            }
        }
    }

    res.working = solver.working_damage(res.fields, committed);
    return res;
}

} // namespace lamdd

#endif // LAMDD_ARCLENGTH_HPP
