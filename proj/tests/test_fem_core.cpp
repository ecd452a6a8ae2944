#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace lamdd;

namespace {

GridMesh unit_square()
{
    GridMesh m;
    m.xs = {0.0, 1.0};
    m.ys = {0.0, 1.0};
    return m;
}

// Strip scenario with the cohesive pair kept linear-elastic: handy single
// source of a two-substructure model with one internal interface.
SubstructuredModel strip_model(InterfaceAssign pair = InterfaceAssign::cohesive)
{
    Scenario sc = builtin_scenario("strip");
    if (pair != InterfaceAssign::cohesive) sc.pair_overrides[1] = pair;
    return build_model(sc);
}

} // namespace

TEST(Assemble, UnitSquareMatchesFrozenValuesAndQuadratureOracle)
{
    // Frozen expected stiffness for E = 1, nu = 0 plane strain: the matrix
    // is exactly (1/24) times an integer matrix (independent quadrature
    // oracle agrees to machine precision).
    const int expect24[8][8] = {
        {12, 3, -6, -3, -6, -3, 0, 3},   {3, 12, 3, 0, -3, -6, -3, -6},
        {-6, 3, 12, -3, 0, -3, -6, 3},   {-3, 0, -3, 12, 3, -6, 3, -6},
        {-6, -3, 0, 3, 12, 3, -6, -3},   {-3, -6, -3, -6, 3, 12, 3, 0},
        {0, -3, -6, 3, -6, 3, 12, -3},   {3, -6, 3, -6, -3, 0, -3, 12}};

    const PlyMaterial mat = PlyMaterial::isotropic(1.0, 0.0);
    const std::array<Vec2, 4> xy = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const auto ke = quad_stiffness(xy, mat.D);
    const auto ko = lamdd_test::quad_stiffness_oracle(xy, mat.D);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            EXPECT_NEAR(ke(i, j), expect24[i][j] / 24.0, 1e-14);
            EXPECT_NEAR(ke(i, j), ko(i, j), 1e-13);
        }
    }
}

TEST(Assemble, RigidModesInKernel)
{
    GridMesh m;
    m.xs = {0.0, 0.4, 1.1, 2.0};
    m.ys = {0.0, 0.3, 0.9};
    const PlyMaterial mat = PlyMaterial::isotropic(2.3e4, 0.27);
    const SpMat K = assemble_stiffness(m, mat);
    const int nn = m.num_nodes();
    VecX tx = VecX::Zero(2 * nn), ty = VecX::Zero(2 * nn), rot = VecX::Zero(2 * nn);
    for (int n = 0; n < nn; ++n) {
        tx(2 * n) = 1.0;
        ty(2 * n + 1) = 1.0;
        const Vec2 p = m.coord(n);
        rot(2 * n) = -p.y();
        rot(2 * n + 1) = p.x();
    }
    const double scale = 2.3e4;
    EXPECT_LT((K * tx).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_LT((K * ty).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_LT((K * rot).cwiseAbs().maxCoeff(), 1e-11 * scale);
}

TEST(Assemble, FrameInvariance)
{
    // rotating the element geometry and the constitutive tensor together
    // transforms the stiffness by the block-diagonal rotation
    const PlyMaterial mat = PlyMaterial::orthotropic(1.4e5, 7e3, 0.3, 5e3, 0.0);
    // parallelogram: constant jacobian, the 2x2 rule integrates exactly
    const std::array<Vec2, 4> xy = {Vec2(0, 0), Vec2(0.8, 0), Vec2(0.9, 0.6), Vec2(0.1, 0.6)};
    const double phi = 0.4;
    const Mat2 R = Eigen::Rotation2Dd(phi).toRotationMatrix();
    std::array<Vec2, 4> xyr;
    for (int a = 0; a < 4; ++a) xyr[static_cast<std::size_t>(a)] = R * xy[static_cast<std::size_t>(a)];

    const auto k0 = quad_stiffness(xy, mat.D);
    const auto kr = quad_stiffness(xyr, mat.rotated_in_plane(phi).D);
    Eigen::Matrix<double, 8, 8> T = Eigen::Matrix<double, 8, 8>::Zero();
    for (int a = 0; a < 4; ++a) T.block<2, 2>(2 * a, 2 * a) = R;
    const Eigen::Matrix<double, 8, 8> expect = T * k0 * T.transpose();
    EXPECT_LT((kr - expect).norm(), 1e-10 * k0.norm());

    // and the independent oracle agrees on the rotated configuration
    const auto ko = lamdd_test::quad_stiffness_oracle(xyr, mat.rotated_in_plane(phi).D);
    EXPECT_LT((kr - ko).norm(), 1e-10 * k0.norm());
}

TEST(Assemble, NonPositiveDefiniteTensorRejected)
{
    GridMesh m = unit_square();
    PlyMaterial bad;
    bad.D << 1, 2, 0, 2, 1, 0, 0, 0, 1; // indefinite
    EXPECT_THROW(assemble_stiffness(m, bad), solver_error);
}

namespace {

// Robin data reproducing the exact uniaxial state of the strip's bottom
// substructure: traction t on the cohesive top edge, clamp at the bottom.
SubstructureState solve_uniaxial_block(const SubstructuredModel& model, double t, int sub_id,
                                       std::shared_ptr<SolveStats> stats)
{
    const Substructure& sub = model.subs[static_cast<std::size_t>(sub_id)];
    const double E = sub.material.D(1, 1); // nu = 0
    const double h = sub.mesh.ys.back() - sub.mesh.ys.front();
    SubstructureOperator op(model, sub_id, model.k_minus, std::move(stats));
    std::vector<std::vector<Vec2>> What(op.interfaces().size()), Fhat(op.interfaces().size());
    std::vector<const std::vector<Vec2>*> Wp, Fp;
    for (std::size_t li = 0; li < op.interfaces().size(); ++li) {
        const auto& [fi, side] = op.interfaces()[li];
        const Interface& f = model.interfaces[static_cast<std::size_t>(fi)];
        const bool top = f.kind == InterfaceKind::cohesive;
        What[li].assign(static_cast<std::size_t>(f.ngp()), top ? Vec2(0.0, t * h / E) : Vec2(0.0, 0.0));
        Fhat[li].assign(static_cast<std::size_t>(f.ngp()), top ? Vec2(0.0, t) : Vec2(0.0, -t));
        Wp.push_back(&What[li]);
        Fp.push_back(&Fhat[li]);
    }
    return robin_solve(op, Wp, Fp);
}

} // namespace

TEST(RobinSolve, ZeroDataGivesZeroState)
{
    const SubstructuredModel model = strip_model();
    auto stats = std::make_shared<SolveStats>();
    const SubstructureState st = solve_uniaxial_block(model, 0.0, 0, stats);
    EXPECT_LT(st.u.cwiseAbs().maxCoeff(), 1e-300);
}

TEST(RobinSolve, UniaxialAnalyticSolution)
{
    const SubstructuredModel model = strip_model();
    const double t = 3.7; // traction
    const Substructure& sub = model.subs[0];
    const double E = sub.material.D(1, 1);
    auto stats = std::make_shared<SolveStats>();
    const SubstructureState st = solve_uniaxial_block(model, t, 0, stats);
    for (int n = 0; n < sub.mesh.num_nodes(); ++n) {
        const Vec2 p = sub.mesh.coord(n);
        EXPECT_NEAR(st.u(2 * n), 0.0, 1e-12 * t / E);
        EXPECT_NEAR(st.u(2 * n + 1), t * p.y() / E, 1e-10 * std::abs(t) / E * sub.mesh.ys.back());
    }
    const auto sig = stress_at_gauss(sub.mesh, sub.material, st.u);
    for (const auto& s : sig) {
        EXPECT_NEAR(s[0], 0.0, 1e-9 * t);
        EXPECT_NEAR(s[1], t, 1e-9 * t);
        EXPECT_NEAR(s[2], 0.0, 1e-9 * t);
    }
}

TEST(RobinSolve, Deterministic)
{
    const SubstructuredModel model = strip_model();
    auto stats = std::make_shared<SolveStats>();
    const SubstructureState a = solve_uniaxial_block(model, 1.3, 0, stats);
    const SubstructureState b = solve_uniaxial_block(model, 1.3, 0, stats);
    ASSERT_EQ(a.u.size(), b.u.size());
    for (long i = 0; i < a.u.size(); ++i) EXPECT_EQ(a.u(i), b.u(i));
}

TEST(RobinSolve, LinearInData)
{
    const SubstructuredModel model = strip_model();
    auto stats = std::make_shared<SolveStats>();
    const SubstructureState a = solve_uniaxial_block(model, 1.0, 0, stats);
    const SubstructureState b = solve_uniaxial_block(model, 2.5, 0, stats);
    const SubstructureState c = solve_uniaxial_block(model, 3.5, 0, stats);
    EXPECT_LT(((a.u + b.u) - c.u).cwiseAbs().maxCoeff(), 1e-12 * c.u.cwiseAbs().maxCoeff());
}

TEST(RobinSolve, WorkReciprocity)
{
    const SubstructuredModel model = strip_model();
    auto stats = std::make_shared<SolveStats>();
    SubstructureOperator op(model, 0, model.k_minus, stats);
    lamdd_test::Rng rng(17);

    auto random_case = [&]() {
        std::vector<std::vector<Vec2>> What(op.interfaces().size()), Fhat(op.interfaces().size());
        for (std::size_t li = 0; li < op.interfaces().size(); ++li) {
            const auto& [fi, side] = op.interfaces()[li];
            const Interface& f = model.interfaces[static_cast<std::size_t>(fi)];
            What[li].resize(static_cast<std::size_t>(f.ngp()));
            Fhat[li].resize(static_cast<std::size_t>(f.ngp()));
            for (auto& v : What[li]) v = Vec2(rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3));
            for (auto& v : Fhat[li]) v = Vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
        }
        return std::make_pair(What, Fhat);
    };
    auto [Wa, Fa] = random_case();
    auto [Wb, Fb] = random_case();
    auto solve_case = [&](const std::vector<std::vector<Vec2>>& W, const std::vector<std::vector<Vec2>>& F) {
        std::vector<const std::vector<Vec2>*> Wp, Fp;
        for (std::size_t i = 0; i < W.size(); ++i) {
            Wp.push_back(&W[i]);
            Fp.push_back(&F[i]);
        }
        return robin_solve(op, Wp, Fp);
    };
    const SubstructureState sa = solve_case(Wa, Fa);
    const SubstructureState sb = solve_case(Wb, Fb);

    auto work = [&](const SubstructureState& x, const SubstructureState& y) {
        double sum = 0.0;
        for (std::size_t li = 0; li < op.interfaces().size(); ++li) {
            const auto& [fi, side] = op.interfaces()[li];
            const Interface& f = model.interfaces[static_cast<std::size_t>(fi)];
            for (int g = 0; g < f.ngp(); ++g)
                sum += f.weights[static_cast<std::size_t>(g)] *
                       x.F[li][static_cast<std::size_t>(g)].dot(y.W[li][static_cast<std::size_t>(g)]);
        }
        return sum;
    };
    const double wab = work(sa, sb), wba = work(sb, sa);
    EXPECT_NEAR(wab, wba, 1e-10 * (std::abs(wab) + std::abs(wba) + 1e-30));
}

TEST(SubstructureOperator, NoInterfaceNoConstraintIsSingular)
{
    Scenario sc = builtin_scenario("strip");
    SubstructuredModel model = build_model(sc);
    // fabricate an isolated substructure by dropping its interface lists
    model.sub_interfaces[0].clear();
    auto stats = std::make_shared<SolveStats>();
    EXPECT_THROW(SubstructureOperator(model, 0, model.k_minus, stats), solver_error);
}

TEST(SolveStats, CountersTrackFactorizationsAndBacksubs)
{
    const SubstructuredModel model = strip_model();
    auto stats = std::make_shared<SolveStats>();
    EXPECT_EQ(stats->factorizations.load(), 0);
    SubstructureOperator op(model, 0, model.k_minus, stats);
    EXPECT_EQ(stats->factorizations.load(), 1);
    VecX rhs = VecX::Zero(op.ndof());
    (void)op.solve(rhs);
    (void)op.solve(rhs);
    EXPECT_EQ(stats->backsubs.load(), 2);
}

// ---- equilibrium residual -------------------------------------------

namespace {

// Exact homogeneous elastic strip state at prescribed displacement delta:
// traction from the series compliance, fields filled analytically.
Fields analytic_strip_fields(const SubstructuredModel& model, double delta)
{
    const double E = model.subs[0].material.D(1, 1);
    const double H = 10.0; // two plies of 5
    const double y_if = 5.0;
    const double t = delta / (H / E + 1.0 / model.cohesive.kn0);
    const double wj = t / model.cohesive.kn0;

    Fields s = Fields::zero(model);
    auto uy = [&](double y, bool top_block) {
        return t * y / E + (top_block ? wj : 0.0);
    };
    for (std::size_t e = 0; e < model.subs.size(); ++e) {
        const auto& mesh = model.subs[e].mesh;
        const bool top_block = model.subs[e].ply == 1;
        for (int n = 0; n < mesh.num_nodes(); ++n)
            s.u[e](2 * n + 1) = uy(mesh.coord(n).y(), top_block);
    }
    for (const auto& f : model.interfaces) {
        auto& fld = s.iface[static_cast<std::size_t>(f.id)];
        for (int g = 0; g < f.ngp(); ++g) {
            const std::size_t k = static_cast<std::size_t>(g);
            if (f.kind == InterfaceKind::cohesive) {
                fld.W_a[k] = Vec2(0.0, uy(y_if, false));
                fld.W_b[k] = Vec2(0.0, uy(y_if, true));
                fld.F_a[k] = Vec2(0.0, t);
                fld.F_b[k] = Vec2(0.0, -t);
            } else if (f.part == "bottom") {
                fld.W_a[k] = Vec2::Zero();
                fld.F_a[k] = Vec2(0.0, -t);
            } else { // top
                fld.W_a[k] = Vec2(0.0, delta);
                fld.F_a[k] = Vec2(0.0, t);
            }
        }
    }
    return s;
}

std::vector<std::unique_ptr<SubstructureOperator>> make_ops(const SubstructuredModel& model)
{
    std::vector<std::unique_ptr<SubstructureOperator>> ops;
    auto stats = std::make_shared<SolveStats>();
    for (const auto& sub : model.subs)
        ops.push_back(std::make_unique<SubstructureOperator>(model, sub.id, model.k_minus, stats));
    return ops;
}

} // namespace

TEST(EquilibriumResidual, AnalyticSolutionBalances)
{
    const SubstructuredModel model = strip_model();
    const auto ops = make_ops(model);
    const Fields s = analytic_strip_fields(model, 1e-3);
    EXPECT_LT(equilibrium_residual(model, ops, s), 1e-9);
}

TEST(EquilibriumResidual, ConvexCombinationStaysAdmissible)
{
    const SubstructuredModel model = strip_model();
    const auto ops = make_ops(model);
    const Fields a = analytic_strip_fields(model, 1e-3);
    const Fields b = analytic_strip_fields(model, 2e-3);
    const double ra = equilibrium_residual(model, ops, a);
    const double rb = equilibrium_residual(model, ops, b);
    const Fields mid = combine(a, b, 0.5);
    EXPECT_LE(equilibrium_residual(model, ops, mid), std::max(ra, rb) + 1e-12);
}

TEST(EquilibriumResidual, PerturbedStateDetected)
{
    const SubstructuredModel model = strip_model();
    const auto ops = make_ops(model);
    Fields s = analytic_strip_fields(model, 1e-3);
    s.u[0](3) += 1e-4;
    EXPECT_GT(equilibrium_residual(model, ops, s), 1e-6);
}
