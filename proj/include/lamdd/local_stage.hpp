#ifndef LAMDD_LOCAL_STAGE_HPP
#define LAMDD_LOCAL_STAGE_HPP

#include "lamdd/fields.hpp"

namespace lamdd {

/// Interface laws frozen for a linearized solve: fixed cohesive secant
/// diagonals (n, t1) and fixed contact open/closed branches. Used by the
/// arc-length prediction solves.
struct FrozenLaws {
    std::vector<std::vector<Vec2>> cohesive_k; // per cohesive_index, per gp: diag(kn, kt)
    std::vector<std::vector<char>> contact_open; // per contact_index, per gp

    bool empty() const { return cohesive_k.empty() && contact_open.empty(); }
};

struct LocalStageOptions {
    double k_plus = 0.0;
    double amplitude = 0.0; // boundary data multiplier at the current time
    int max_iters = 50;
    double tol = 1e-12;
    const FrozenLaws* frozen = nullptr; // non-null: linearized laws
    int threads = 1;
};

namespace detail {

inline Vec2 to_local(const Interface& f, const Vec2& v)
{
    return Vec2(v.dot(f.normal), v.dot(f.tangent));
}

inline Vec2 to_global(const Interface& f, const Vec2& v)
{
    return v.x() * f.normal + v.y() * f.tangent;
}

} // namespace detail

/// One local-stage solve at a single cohesive Gauss point: fixed point on
/// the secant operator. Returns the hat values and the effective damage.
/// `committed` is the damage history through t_n; the current-iterate jump
/// extends it per the discretized law.
inline void local_cohesive_point(const Interface& f, const CohesiveMaterial& mat,
                                 const Vec2& W_a, const Vec2& F_a, const Vec2& W_b, const Vec2& F_b,
                                 const DamageState& committed, const LocalStageOptions& opt,
                                 const Vec2* frozen_k, Vec2& What_a, Vec2& Fhat_a, Vec2& What_b,
                                 Vec2& Fhat_b, DamageState& working, int gp_id)
{
    const double kp = opt.k_plus;
    // Sum of hat displacements is fixed by the two search directions and
    // the force balance.
    const Vec2 S = (W_a + W_b) - (F_a + F_b) / kp;
    // Local-frame right-hand side of the jump equation.
    const Vec2 rhs = detail::to_local(f, kp * (W_b - W_a) + (F_a - F_b));

    Vec2 D = detail::to_local(f, W_b - W_a); // jump iterate (n, t)
    Vec2 kdiag = Vec2::Zero();
    DamageState st = committed;
    const double scale = rhs.norm() / kp + 1e-300;

    // The normal sign of the solution is the sign of rhs_n, which fixes
    // the h+ branch up front.
    const bool opening = rhs.x() > 0.0;
    auto stiffness_for = [&](double d) {
        return Vec2((1.0 - (opening ? d : 0.0)) * mat.kn0, (1.0 - d) * mat.kt0);
    };
    auto jump_for = [&](double d) {
        const Vec2 k = stiffness_for(d);
        return Vec2(rhs.x() / (2.0 * k.x() + kp), rhs.y() / (2.0 * k.y() + kp));
    };
    auto damage_for = [&](const Vec2& jnt) {
        Jump j{jnt.x(), jnt.y(), 0.0};
        return damage_of(std::max(committed.y_hist, coupled_force(j, mat)), mat);
    };

    if (frozen_k) {
        kdiag = *frozen_k;
        D = Vec2(rhs.x() / (2.0 * kdiag.x() + kp), rhs.y() / (2.0 * kdiag.y() + kp));
        st = committed; // internal variables fixed during the resolution
        working = st;
    } else {
        // Fast path: fixed point on the secant operator.
        bool done = false;
        for (int it = 0; it < opt.max_iters; ++it) {
            const double d = damage_for(D);
            const Vec2 Dn = jump_for(d);
            const double delta = (Dn - D).norm();
            D = Dn;
            if (delta <= opt.tol * (D.norm() + scale)) {
                done = true;
                break;
            }
        }
        if (!done) {
            // The fixed point diverges when the local softening slope
            // exceeds k_plus/2. Fall back to a safeguarded bisection on d:
            // phi(d) = damage(jump(d)) - d has phi(d_lo) >= 0, phi(1) <= 0.
            double lo = committed.d, hi = 1.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double phi = damage_for(jump_for(mid)) - mid;
                if (phi >= 0.0) lo = mid;
                else hi = mid;
                if (hi - lo <= 1e-16) break;
            }
            D = jump_for(0.5 * (lo + hi));
        }
        // Secant consistent with the final jump.
        Jump j{D.x(), D.y(), 0.0};
        st.y_hist = std::max(committed.y_hist, coupled_force(j, mat));
        st.d = damage_of(st.y_hist, mat);
        kdiag = stiffness_for(st.d);
        D = jump_for(st.d);
        const double resid = (Vec2(2.0 * kdiag.x() * D.x() + kp * D.x(),
                                   2.0 * kdiag.y() * D.y() + kp * D.y()) -
                              rhs).norm() +
                             std::abs(damage_for(D) - st.d) * scale * kp;
        if (!(resid <= 1e-8 * (rhs.norm() + kp * scale) + 1e-300))
            throw solver_error("local stage: cohesive point " + std::to_string(gp_id) +
                               " of interface " + std::to_string(f.id) + " did not converge");
        working = st;
    }

    const Vec2 Dg = detail::to_global(f, D);
    What_a = 0.5 * (S - Dg);
    What_b = 0.5 * (S + Dg);
    Fhat_a = detail::to_global(f, Vec2(kdiag.x() * D.x(), kdiag.y() * D.y()));
    Fhat_b = -Fhat_a;
}

/// Frictionless unilateral contact at one Gauss point. Open points are
/// traction free; closed points carry a purely normal force with zero
/// normal jump. The open/closed branch follows the sign of the trial gap
/// (gap exactly zero counts as closed).
inline void local_contact_point(const Interface& f, const Vec2& W_a, const Vec2& F_a,
                                const Vec2& W_b, const Vec2& F_b, double kp, const char* frozen_open,
                                Vec2& What_a, Vec2& Fhat_a, Vec2& What_b, Vec2& Fhat_b)
{
    const Vec2 la = detail::to_local(f, W_a), lb = detail::to_local(f, W_b);
    const Vec2 fa = detail::to_local(f, F_a), fb = detail::to_local(f, F_b);

    // Tangential: frictionless, zero traction on both sides.
    const double wat = la.y() - fa.y() / kp;
    const double wbt = lb.y() - fb.y() / kp;

    // Normal trial gap of the open branch.
    const double gap = (lb.x() - fb.x() / kp) - (la.x() - fa.x() / kp);
    const bool open = frozen_open ? (*frozen_open != 0) : (gap > 0.0);

    double wan, wbn, fan, fbn;
    if (open) {
        wan = la.x() - fa.x() / kp;
        wbn = lb.x() - fb.x() / kp;
        fan = fbn = 0.0;
    } else {
        const double Sn = (la.x() + lb.x()) - (fa.x() + fb.x()) / kp;
        wan = wbn = 0.5 * Sn;
        fan = fa.x() + kp * (wan - la.x());
        fbn = -fan;
    }
    What_a = detail::to_global(f, Vec2(wan, wat));
    What_b = detail::to_global(f, Vec2(wbn, wbt));
    Fhat_a = detail::to_global(f, Vec2(fan, 0.0));
    Fhat_b = detail::to_global(f, Vec2(fbn, 0.0));
}

/// The LaTIn local stage: solves the interface relations together with the
/// ascent search direction at every Gauss point of every interface.
/// Pointwise and independent per Gauss point. Returns hat fields in
/// `s_hat` and the per-point effective damage in `working`.
inline void local_stage(const SubstructuredModel& model, const Fields& s,
                        const DamageHistory& committed, const LocalStageOptions& opt,
                        Fields& s_hat, DamageHistory& working)
{
    const double kp = opt.k_plus;
    parallel_for(model.interfaces.size(), opt.threads, [&](std::size_t idx) {
        const Interface& f = model.interfaces[idx];
        const InterfaceField& in = s.iface[idx];
        InterfaceField& out = s_hat.iface[idx];
        out.resize(f.ngp(), f.sub_b >= 0);
        switch (f.kind) {
        case InterfaceKind::perfect: {
            for (int g = 0; g < f.ngp(); ++g) {
                const std::size_t k = static_cast<std::size_t>(g);
                const Vec2 What = 0.5 * (in.W_a[k] + in.W_b[k]) - (in.F_a[k] + in.F_b[k]) / (2.0 * kp);
                out.W_a[k] = What;
                out.W_b[k] = What;
                out.F_a[k] = in.F_a[k] + kp * (What - in.W_a[k]);
                out.F_b[k] = -out.F_a[k];
            }
            break;
        }
        case InterfaceKind::cohesive: {
            const auto& hist = committed[static_cast<std::size_t>(f.cohesive_index)];
            auto& work = working[static_cast<std::size_t>(f.cohesive_index)];
            const std::vector<Vec2>* fk =
                opt.frozen ? &opt.frozen->cohesive_k[static_cast<std::size_t>(f.cohesive_index)] : nullptr;
            for (int g = 0; g < f.ngp(); ++g) {
                const std::size_t k = static_cast<std::size_t>(g);
                local_cohesive_point(f, model.cohesive, in.W_a[k], in.F_a[k], in.W_b[k], in.F_b[k],
                                     hist[k], opt, fk ? &(*fk)[k] : nullptr, out.W_a[k], out.F_a[k],
                                     out.W_b[k], out.F_b[k], work[k], g);
            }
            break;
        }
        case InterfaceKind::contact: {
            const std::vector<char>* fo =
                opt.frozen ? &opt.frozen->contact_open[static_cast<std::size_t>(f.contact_index)] : nullptr;
            for (int g = 0; g < f.ngp(); ++g) {
                const std::size_t k = static_cast<std::size_t>(g);
                local_contact_point(f, in.W_a[k], in.F_a[k], in.W_b[k], in.F_b[k], kp,
                                    fo ? &(*fo)[k] : nullptr, out.W_a[k], out.F_a[k], out.W_b[k],
                                    out.F_b[k]);
            }
            break;
        }
        case InterfaceKind::boundary_dirichlet: {
            for (int g = 0; g < f.ngp(); ++g) {
                const std::size_t k = static_cast<std::size_t>(g);
                out.W_a[k] = opt.amplitude * f.bc_unit;
                out.F_a[k] = in.F_a[k] + kp * (out.W_a[k] - in.W_a[k]);
            }
            break;
        }
        case InterfaceKind::boundary_neumann: {
            for (int g = 0; g < f.ngp(); ++g) {
                const std::size_t k = static_cast<std::size_t>(g);
                out.F_a[k] = opt.amplitude * f.bc_unit;
                out.W_a[k] = in.W_a[k] + (out.F_a[k] - in.F_a[k]) / kp;
            }
            break;
        }
        }
    });
}

/// Residual of the interface relations evaluated on hat fields; the local
/// stage output satisfies them exactly (up to the quasi-Newton tolerance
/// for cohesive points).
inline double interface_relation_residual(const SubstructuredModel& model, const Fields& s_hat,
                                          const DamageHistory& committed, double amplitude)
{
    double res = 0.0;
    for (const auto& f : model.interfaces) {
        const InterfaceField& fld = s_hat.iface[static_cast<std::size_t>(f.id)];
        for (int g = 0; g < f.ngp(); ++g) {
            const std::size_t k = static_cast<std::size_t>(g);
            switch (f.kind) {
            case InterfaceKind::perfect:
                res = std::max(res, (fld.F_a[k] + fld.F_b[k]).norm());
                res = std::max(res, (fld.W_a[k] - fld.W_b[k]).norm() * model.k_plus);
                break;
            case InterfaceKind::cohesive: {
                const Jump j = jump_at(f, fld, g);
                const auto& hist = committed[static_cast<std::size_t>(f.cohesive_index)][k];
                const double y = std::max(hist.y_hist, coupled_force(j, model.cohesive));
                const Vec3 tr = traction(damage_of(y, model.cohesive), j, model.cohesive);
                const Vec2 t2 = tr[0] * f.normal + tr[1] * f.tangent;
                res = std::max(res, (fld.F_a[k] - t2).norm());
                res = std::max(res, (fld.F_a[k] + fld.F_b[k]).norm());
                break;
            }
            case InterfaceKind::contact: {
                const double gap = (fld.W_b[k] - fld.W_a[k]).dot(f.normal);
                const double p = fld.F_a[k].dot(f.normal);
                res = std::max(res, (fld.F_a[k] + fld.F_b[k]).norm());
                res = std::max(res, std::abs(fld.F_a[k].dot(f.tangent)));
                res = std::max(res, std::max(0.0, p));                     // tension
                res = std::max(res, model.k_plus * std::max(0.0, -gap));   // penetration
                res = std::max(res, std::abs(p) * (gap > 0.0 ? 1.0 : 0.0)); // open with force
                break;
            }
            case InterfaceKind::boundary_dirichlet:
                res = std::max(res, (fld.W_a[k] - amplitude * f.bc_unit).norm() * model.k_plus);
                break;
            case InterfaceKind::boundary_neumann:
                res = std::max(res, (fld.F_a[k] - amplitude * f.bc_unit).norm());
                break;
            }
        }
    }
    return res;
}

} // namespace lamdd

#endif // LAMDD_LOCAL_STAGE_HPP
