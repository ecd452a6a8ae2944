#ifndef LAMDD_FIELDS_HPP
#define LAMDD_FIELDS_HPP

#include "lamdd/model.hpp"

namespace lamdd {

/// Paired (W, F) distributions on the Gauss points of one interface.
/// Side b is unused for boundary interfaces.
struct InterfaceField {
    std::vector<Vec2> W_a, F_a, W_b, F_b;

    void resize(int ngp, bool two_sided)
    {
        W_a.assign(static_cast<std::size_t>(ngp), Vec2::Zero());
        F_a.assign(static_cast<std::size_t>(ngp), Vec2::Zero());
        if (two_sided) {
            W_b.assign(static_cast<std::size_t>(ngp), Vec2::Zero());
            F_b.assign(static_cast<std::size_t>(ngp), Vec2::Zero());
        }
    }
};

/// One full set of kinematic/static unknowns: per-substructure nodal
/// displacements and per-interface (W, F) distributions.
struct Fields {
    std::vector<VecX> u;               // per substructure
    std::vector<InterfaceField> iface; // per interface

    static Fields zero(const SubstructuredModel& model)
    {
        Fields f;
        f.u.reserve(model.subs.size());
        for (const auto& s : model.subs) f.u.push_back(VecX::Zero(2 * s.mesh.num_nodes()));
        f.iface.resize(model.interfaces.size());
        for (const auto& fc : model.interfaces)
            f.iface[static_cast<std::size_t>(fc.id)].resize(fc.ngp(), fc.sub_b >= 0);
        return f;
    }
};

/// w * a + (1 - w) * b applied to every field.
inline Fields combine(const Fields& b, const Fields& a, double w)
{
    Fields out = b;
    for (std::size_t s = 0; s < out.u.size(); ++s) out.u[s] = w * a.u[s] + (1.0 - w) * b.u[s];
    for (std::size_t i = 0; i < out.iface.size(); ++i) {
        auto mix = [w](std::vector<Vec2>& dst, const std::vector<Vec2>& src) {
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = w * src[k] + (1.0 - w) * dst[k];
        };
        mix(out.iface[i].W_a, a.iface[i].W_a);
        mix(out.iface[i].F_a, a.iface[i].F_a);
        mix(out.iface[i].W_b, a.iface[i].W_b);
        mix(out.iface[i].F_b, a.iface[i].F_b);
    }
    return out;
}

inline Fields scaled(const Fields& f, double c)
{
    Fields out = f;
    for (auto& u : out.u) u *= c;
    for (auto& fc : out.iface) {
        for (auto& v : fc.W_a) v *= c;
        for (auto& v : fc.F_a) v *= c;
        for (auto& v : fc.W_b) v *= c;
        for (auto& v : fc.F_b) v *= c;
    }
    return out;
}

/// Displacement jump W_b - W_a at one Gauss point, in the (n, t1, t2) basis.
inline Jump jump_at(const Interface& f, const InterfaceField& fld, int gp)
{
    const Vec2 d = fld.W_b[static_cast<std::size_t>(gp)] - fld.W_a[static_cast<std::size_t>(gp)];
    Jump j;
    j.dn = d.dot(f.normal);
    j.dt1 = d.dot(f.tangent);
    j.dt2 = 0.0;
    return j;
}

/// Per-Gauss-point damage values, one vector per cohesive interface
/// (indexed by Interface::cohesive_index).
using DamageHistory = std::vector<std::vector<DamageState>>;

inline DamageHistory zero_history(const SubstructuredModel& model)
{
    DamageHistory h(static_cast<std::size_t>(model.num_cohesive));
    for (const auto& f : model.interfaces)
        if (f.cohesive_index >= 0)
            h[static_cast<std::size_t>(f.cohesive_index)].assign(static_cast<std::size_t>(f.ngp()), DamageState{});
    return h;
}

/// Full converged solution at a computation time.
struct Snapshot {
    double time = 0.0;
    double amplitude = 0.0; // prescribed amplitude, or lambda in arc-length modes
    double lambda = 0.0;
    Fields fields;
    DamageHistory working; // provisional solver damage, committed separately
    double e_dissi = 0.0;

    static Snapshot zero(const SubstructuredModel& model)
    {
        Snapshot s;
        s.fields = Fields::zero(model);
        s.working = zero_history(model);
        return s;
    }
};

} // namespace lamdd

#endif // LAMDD_FIELDS_HPP
