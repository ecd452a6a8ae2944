#ifndef LAMDD_STRIP_ORACLE_HPP
#define LAMDD_STRIP_ORACLE_HPP

#include "lamdd/cohesive.hpp"

namespace lamdd {

/// Closed-form homogeneous response of a single cohesive interface in
/// series with two elastic blocks (nu = 0) under prescribed end
/// displacement, parametrized by the monotone interface jump w:
///
///   Y(w)     = kn0 w^2 / 2
///   d(w)     = min(1, n/(n+1) (Y/Yc)^n) = min(1, c w^(2n)),
///              c = n/(n+1) (kn0 / (2 Yc))^n
///   t(w)     = (1 - d) kn0 w
///   delta(w) = t(w) H / E + w          (blocks in series)
///   R(w)     = t(w) * width
///
/// The path snap-backs whenever delta'(w) < 0 somewhere, i.e. when the
/// softening slope |t'| exceeds the block stiffness E / H.
struct OracleStripSolution {
    CohesiveMaterial mat;
    double E = 0.0;     // block modulus (uniaxial with nu = 0)
    double H = 0.0;     // total block height in series
    double width = 0.0; // interface length in the model plane

    double c_coeff() const
    {
        return mat.n / (mat.n + 1.0) * std::pow(mat.kn0 / (2.0 * mat.Yc), mat.n);
    }

    double damage(double w) const
    {
        if (w <= 0.0) return 0.0;
        return std::min(1.0, c_coeff() * std::pow(w, 2.0 * mat.n));
    }

    double traction(double w) const { return (1.0 - damage(w)) * mat.kn0 * w; }

    double delta(double w) const { return traction(w) * H / E + w; }

    double reaction(double w) const { return traction(w) * width; }

    double w_peak() const
    {
        return std::pow(c_coeff() * (2.0 * mat.n + 1.0), -1.0 / (2.0 * mat.n));
    }

    double w_fail() const { return std::pow(c_coeff(), -1.0 / (2.0 * mat.n)); }

    /// Most negative traction slope on the softening branch.
    double min_traction_slope() const
    {
        const double c = c_coeff();
        const double n2 = 2.0 * mat.n;
        // t'(w) = kn0 (1 - c (2n+1) w^(2n)) decreases until w_fail
        const double wf = w_fail();
        return mat.kn0 * (1.0 - c * (n2 + 1.0) * std::pow(wf, n2));
    }

    bool has_snap_back() const { return min_traction_slope() * H / E + 1.0 < 0.0; }
};

} // namespace lamdd

#endif // LAMDD_STRIP_ORACLE_HPP
