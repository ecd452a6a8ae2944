#ifndef LAMDD_TEST_ORACLES_HPP
#define LAMDD_TEST_ORACLES_HPP

// Independent oracles for the test suites. These deliberately do not call
// the library code paths they are used to check.

#include "lamdd/lamdd.hpp"

namespace lamdd_test {

using lamdd::Mat3;
using lamdd::SubstructuredModel;
using lamdd::Vec2;
using lamdd::VecX;

/// Plane-strain Q4 element stiffness by dense high-order quadrature with
/// its own shape-function code (independent of the assembly path).
Eigen::Matrix<double, 8, 8> quad_stiffness_oracle(const std::array<Vec2, 4>& xy, const Mat3& D,
                                                  int quad_order = 6);

/// Monolithic FE solve on the same mesh: matched nodes welded across
/// perfect interfaces, cohesive interfaces as linear springs with a given
/// (or pristine) stiffness, open contact ignored, strong Dirichlet from
/// the boundary interfaces.
class MonolithicOracle {
public:
    explicit MonolithicOracle(const SubstructuredModel& model);

    /// Displacements per substructure for boundary data scaled by `amplitude`.
    std::vector<VecX> solve(double amplitude) const;

    /// Energy norm of a per-substructure displacement state (welded).
    double energy_norm(const std::vector<VecX>& u) const;

    /// Energy norm of the difference of two states.
    double energy_diff(const std::vector<VecX>& a, const std::vector<VecX>& b) const;

    int global_dofs() const { return ndof_; }

private:
    VecX weld(const std::vector<VecX>& u) const;

    const SubstructuredModel* model_;
    std::vector<std::vector<int>> node_gid_; // per sub, per node: global node id
    int nnodes_ = 0;
    int ndof_ = 0;
    lamdd::SpMat K_;
    std::vector<int> fixed_dofs_;
    std::vector<double> fixed_unit_values_; // at amplitude 1
    VecX unit_load_;                        // Neumann at amplitude 1
};

/// Pointwise cohesive-law integrator: piecewise-linear jump path sampled
/// with `substeps` per leg, running-max coupled force, damage, traction
/// and dissipated energy. Literal re-implementation of the law formulas.
struct CohesivePathResult {
    double d = 0.0;
    double y_hist = 0.0;
    lamdd::Vec3 traction = lamdd::Vec3::Zero();
    double dissipated = 0.0;
};

CohesivePathResult integrate_cohesive_path(const std::vector<lamdd::Jump>& waypoints,
                                           const lamdd::CohesiveMaterial& mat, int substeps);

/// Deterministic xorshift generator for reproducible random tests.
struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    uint64_t next()
    {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    double uniform(double a, double b)
    {
        return a + (b - a) * (static_cast<double>(next() % (1ull << 53)) / static_cast<double>(1ull << 53));
    }
};

} // namespace lamdd_test

#endif // LAMDD_TEST_ORACLES_HPP
