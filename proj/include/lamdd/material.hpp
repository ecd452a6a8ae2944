#ifndef LAMDD_MATERIAL_HPP
#define LAMDD_MATERIAL_HPP

#include "lamdd/common.hpp"

#include <cmath>

namespace lamdd {

/// Plane-strain ply constitutive data in the model frame (x = span,
/// y = stacking direction). Voigt order (xx, yy, xy) with engineering
/// shear strain.
struct PlyMaterial {
    Mat3 D = Mat3::Zero();
    double ex_axis = 0.0; // off-axis longitudinal modulus used to build D

    static PlyMaterial isotropic(double E, double nu)
    {
        if (E <= 0.0) throw config_error("ply material: E must be > 0");
        if (nu < 0.0 || nu >= 0.5) throw config_error("ply material: nu must be in [0, 0.5)");
        PlyMaterial m;
        const double f = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
        m.D << f * (1.0 - nu), f * nu, 0.0,
               f * nu, f * (1.0 - nu), 0.0,
               0.0, 0.0, E / (2.0 * (1.0 + nu));
        m.ex_axis = E;
        return m;
    }

    /// Orthotropic ply seen in a cross-section model. The fiber angle is
    /// measured in the laminate plane; the section sees the off-axis
    /// longitudinal modulus along x and the transverse modulus along the
    /// stacking direction y.
    static PlyMaterial orthotropic(double E1, double E2, double nu12, double G12,
                                   double angle_deg = 0.0)
    {
        if (E1 <= 0.0 || E2 <= 0.0 || G12 <= 0.0)
            throw config_error("ply material: moduli must be > 0");
        if (nu12 < 0.0) throw config_error("ply material: nu12 must be >= 0");
        const double th = angle_deg * M_PI / 180.0;
        const double c = std::cos(th), s = std::sin(th);
        const double inv_ex = (c * c * c * c) / E1 + (s * s * s * s) / E2 +
                              (1.0 / G12 - 2.0 * nu12 / E1) * (s * s * c * c);
        const double ex = 1.0 / inv_ex;

        // Plane-strain reduction from the 3D compliance. Out-of-plane data
        // follows transverse isotropy about the fiber axis: Ez = E2,
        // nu_xz = nu12, nu_yz = nu12.
        const double ey = E2;
        const double ez = E2;
        const double nxy = nu12;
        const double nxz = nu12;
        const double nyz = nu12;
        Mat3 S;
        S << 1.0 / ex, -nxy / ex, -nxz / ex,
             -nxy / ex, 1.0 / ey, -nyz / ey,
             -nxz / ex, -nyz / ey, 1.0 / ez;
        Mat3 C = S.inverse();
        PlyMaterial m;
        m.D << C(0, 0), C(0, 1), 0.0,
               C(0, 1), C(1, 1), 0.0,
               0.0, 0.0, G12;
        m.ex_axis = ex;
        if (!m.positive_definite())
            throw config_error("ply material: resulting elasticity tensor is not positive definite");
        return m;
    }

    /// Constitutive matrix of this material rotated in-plane by phi
    /// (radians), expressed in the fixed frame. Voigt stress rotation with
    /// engineering shear strain.
    PlyMaterial rotated_in_plane(double phi) const
    {
        const double c = std::cos(phi), s = std::sin(phi);
        Mat3 Ts;
        Ts << c * c, s * s, -2.0 * c * s,
              s * s, c * c, 2.0 * c * s,
              c * s, -c * s, c * c - s * s;
        PlyMaterial m;
        m.D = Ts * D * Ts.transpose();
        m.ex_axis = ex_axis;
        return m;
    }

    bool positive_definite() const
    {
        Eigen::LLT<Mat3> llt(D);
        return llt.info() == Eigen::Success;
    }
};

} // namespace lamdd

#endif // LAMDD_MATERIAL_HPP
