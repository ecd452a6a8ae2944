#ifndef LAMDD_COHESIVE_HPP
#define LAMDD_COHESIVE_HPP

#include "lamdd/common.hpp"

#include <cmath>

namespace lamdd {

/// Interface law constants. kn0/kt0 are initial stiffnesses per unit area,
/// Yc the critical force, n the brittleness exponent, alpha the
/// mode-coupling exponent and gamma1/gamma2 the shear coupling weights.
struct CohesiveMaterial {
    double kn0 = 0.0;
    double kt0 = 0.0;
    double Yc = 0.0;
    double n = 0.5;
    double alpha = 1.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;

    void validate() const
    {
        if (kn0 <= 0.0 || kt0 <= 0.0) throw config_error("cohesive: kn0 and kt0 must be > 0");
        if (Yc <= 0.0) throw config_error("cohesive: Yc must be > 0");
        if (n <= 0.0) throw config_error("cohesive: n must be > 0");
        if (alpha <= 0.0) throw config_error("cohesive: alpha must be > 0");
        if (gamma1 < 0.0 || gamma2 < 0.0) throw config_error("cohesive: gamma_i must be >= 0");
    }
};

/// Displacement jump across an interface in the local basis (n, t1, t2).
/// The t2 component is carried for completeness and stays zero in 2D.
struct Jump {
    double dn = 0.0;
    double dt1 = 0.0;
    double dt2 = 0.0;
};

/// Damage at one Gauss point: the shared scalar d and the running maximum
/// of the coupled thermodynamic force over the committed history.
struct DamageState {
    double d = 0.0;
    double y_hist = 0.0;
};

/// Thermodynamic forces (Y1, Y2, Y3). A closing normal jump contributes
/// nothing to Y3.
inline Vec3 thermo_forces(const Jump& j, const CohesiveMaterial& m)
{
    return Vec3(0.5 * m.kt0 * sqr(j.dt1),
                0.5 * m.kt0 * sqr(j.dt2),
                0.5 * m.kn0 * sqr(positive_part(j.dn)));
}

/// Instantaneous coupled force (Y3^a + g1 Y1^a + g2 Y2^a)^(1/a).
inline double coupled_force(double y1, double y2, double y3, const CohesiveMaterial& m)
{
    if (m.alpha == 1.0) return y3 + m.gamma1 * y1 + m.gamma2 * y2;
    const double s = std::pow(y3, m.alpha) + m.gamma1 * std::pow(y1, m.alpha) +
                     m.gamma2 * std::pow(y2, m.alpha);
    return s > 0.0 ? std::pow(s, 1.0 / m.alpha) : 0.0;
}

inline double coupled_force(const Jump& j, const CohesiveMaterial& m)
{
    const Vec3 y = thermo_forces(j, m);
    return coupled_force(y[0], y[1], y[2], m);
}

/// Damage as a function of the history maximum of the coupled force:
/// d = min(1, n/(n+1) (Y/Yc)^n).
inline double damage_of(double y_hist, const CohesiveMaterial& m)
{
    if (y_hist <= 0.0) return 0.0;
    const double w = m.n / (m.n + 1.0) * std::pow(y_hist / m.Yc, m.n);
    return w < 1.0 ? w : 1.0;
}

/// Secant operator diag((1 - h+(dn) d) kn0, (1-d) kt0, (1-d) kt0) in the
/// local basis. A closing jump recovers the full normal stiffness.
inline Vec3 secant_stiffness(double d, const Jump& j, const CohesiveMaterial& m)
{
    return Vec3((1.0 - h_plus(j.dn) * d) * m.kn0,
                (1.0 - d) * m.kt0,
                (1.0 - d) * m.kt0);
}

/// Cohesive traction for a given damage value and jump.
inline Vec3 traction(double d, const Jump& j, const CohesiveMaterial& m)
{
    const Vec3 k = secant_stiffness(d, j, m);
    return Vec3(k[0] * j.dn, k[1] * j.dt1, k[2] * j.dt2);
}

/// One history entry for the pointwise dissipation integral.
struct JumpSample {
    double t = 0.0;
    Jump jump;
};

/// Dissipated energy per unit area along a time-ordered jump history,
/// integrating sum_i Y_i d(d) with the committed (running max) damage
/// trajectory by the trapezoidal rule.
inline double dissipated_energy(const std::vector<JumpSample>& history, const CohesiveMaterial& m)
{
    if (history.size() < 2) return 0.0;
    double e = 0.0;
    double y_run = 0.0;
    double d_prev = 0.0;
    double sum_prev = 0.0;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (i > 0 && !(history[i].t > history[i - 1].t))
            throw std::invalid_argument("dissipated_energy: time stamps must be strictly increasing");
        const Vec3 y = thermo_forces(history[i].jump, m);
        y_run = std::max(y_run, coupled_force(y[0], y[1], y[2], m));
        const double d = damage_of(y_run, m);
        const double sum = y[0] + y[1] + y[2];
        if (i > 0) e += 0.5 * (sum + sum_prev) * (d - d_prev);
        d_prev = d;
        sum_prev = sum;
    }
    return e;
}

} // namespace lamdd

#endif // LAMDD_COHESIVE_HPP
