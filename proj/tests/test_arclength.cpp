#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace lamdd;

namespace {

SubstructuredModel strip_model()
{
    return build_model(builtin_scenario("strip"));
}

ArcOptions strip_opts()
{
    ArcOptions o;
    o.nu_target = 1e-5;
    o.frozen_nu_target = 1e-5;
    o.max_latin_iters = 4000;
    return o;
}

// committed state advanced by n fixed arc-length steps
AnalysisState advance(const SubstructuredModel& model, const LatinSolver& solver, int steps,
                      double dl, const ArcOptions& opt)
{
    AnalysisState state = AnalysisState::initial(model);
    for (int k = 0; k < steps; ++k) {
        const ArcResult ar = solve_unstable_step(solver, state, dl, opt);
        EXPECT_TRUE(ar.converged);
        state.prev_fields = state.current.fields;
        state.has_prev = true;
        state.committed = ar.working;
        state.current.fields = ar.fields;
        state.current.lambda = ar.lambda;
        state.current.amplitude = ar.lambda;
        state.current.time += dl;
    }
    return state;
}

} // namespace

TEST(ControlExtract, SingleOpeningPoint)
{
    const SubstructuredModel model = strip_model();
    Fields base = Fields::zero(model);
    Fields s = Fields::zero(model);
    const Interface& f = model.interfaces[0];
    ASSERT_EQ(f.kind, InterfaceKind::cohesive);
    s.iface[0].W_b[2] = 2e-3 * f.normal; // one opening point
    const ControlSelection sel = control_extract(model, s, &base);
    EXPECT_EQ(sel.iface, 0);
    EXPECT_EQ(sel.gp, 2);
    EXPECT_NEAR(sel.value, 2e-3, 1e-18);
    EXPECT_FALSE(sel.all_negative);
}

TEST(ControlExtract, UniformFieldFirstIndexTieBreak)
{
    const SubstructuredModel model = strip_model();
    Fields base = Fields::zero(model);
    Fields s = Fields::zero(model);
    const Interface& f = model.interfaces[0];
    for (int g = 0; g < f.ngp(); ++g) s.iface[0].W_b[static_cast<std::size_t>(g)] = 1e-3 * f.normal;
    const ControlSelection sel = control_extract(model, s, &base);
    EXPECT_EQ(sel.iface, 0);
    EXPECT_EQ(sel.gp, 0); // documented tie rule
}

TEST(ControlExtract, MatchesBruteForceScan)
{
    const SubstructuredModel model = build_model(builtin_scenario("dcb"));
    lamdd_test::Rng rng(21);
    Fields base = Fields::zero(model);
    Fields s = Fields::zero(model);
    for (auto& fi : s.iface) {
        for (auto& v : fi.W_a) v = Vec2(rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3));
        for (auto& v : fi.W_b) v = Vec2(rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3));
    }
    const ControlSelection sel = control_extract(model, s, &base);
    // exhaustive scan with independent arithmetic
    double best = -1.0;
    int bi = -1, bg = -1;
    for (const auto& f : model.interfaces) {
        if (f.cohesive_index < 0) continue;
        for (int g = 0; g < f.ngp(); ++g) {
            const Vec2 d = s.iface[static_cast<std::size_t>(f.id)].W_b[static_cast<std::size_t>(g)] -
                           s.iface[static_cast<std::size_t>(f.id)].W_a[static_cast<std::size_t>(g)];
            const double dn = d.dot(f.normal), dt = d.dot(f.tangent);
            const double m = std::sqrt(sqr(std::max(dn, 0.0)) + sqr(dt));
            if (m > best) {
                best = m;
                bi = f.id;
                bg = g;
            }
        }
    }
    EXPECT_EQ(sel.iface, bi);
    EXPECT_EQ(sel.gp, bg);
    EXPECT_NEAR(sel.value, best, 1e-15);
}

TEST(ControlExtract, AllClosingFlagged)
{
    const SubstructuredModel model = strip_model();
    Fields base = Fields::zero(model);
    Fields s = Fields::zero(model);
    const Interface& f = model.interfaces[0];
    for (int g = 0; g < f.ngp(); ++g)
        s.iface[0].W_b[static_cast<std::size_t>(g)] = -(1e-3 + 1e-4 * g) * f.normal;
    const ControlSelection sel = control_extract(model, s, &base);
    EXPECT_TRUE(sel.all_negative);
    EXPECT_EQ(sel.value, 0.0);
    EXPECT_EQ(sel.gp, 0); // least negative increment
}

TEST(NewtonStep, OneDofSymbolicPrediction)
{
    // scalar surrogate: K = k, q_ext = 1, U_tn = u0, unit response 1/k:
    // lambda = (dl + u0) / (1/k) = k (dl + u0)
    const double k = 3.7, u0 = 0.12, dl = 0.034;
    const double lambda = arc_lambda_prediction(dl, u0, 1.0 / k);
    EXPECT_DOUBLE_EQ(lambda, k * (dl + u0));
}

TEST(SolveUnstableStep, LinearElasticConvergesInOneCorrection)
{
    // huge critical force: interface stays pristine, K constant, so the
    // first prediction already satisfies the true laws
    Scenario sc = builtin_scenario("strip");
    sc.cohesive.Yc = 1e22;
    const SubstructuredModel model = build_model(sc);
    LatinSolver solver(model);
    AnalysisState state = AnalysisState::initial(model);
    ArcOptions opt = strip_opts();
    const double dl = 4e-4;
    const ArcResult ar = solve_unstable_step(solver, state, dl, opt);
    ASSERT_TRUE(ar.converged);
    EXPECT_EQ(ar.newton_iterations, 1);
    EXPECT_NEAR(ar.control_value, dl, 1e-8 * dl);
    // lambda proportional to dl in the linear case
    const ArcResult ar2 = solve_unstable_step(solver, state, 2.0 * dl, opt);
    ASSERT_TRUE(ar2.converged);
    EXPECT_NEAR(ar2.lambda, 2.0 * ar.lambda, 1e-6 * ar2.lambda);
}

TEST(SolveUnstableStep, ZeroArcLengthKeepsLambda)
{
    Scenario sc = builtin_scenario("strip");
    sc.cohesive.Yc = 1e22; // linear case
    const SubstructuredModel model = build_model(sc);
    LatinSolver solver(model);
    ArcOptions opt = strip_opts();
    AnalysisState state = AnalysisState::initial(model);
    // advance one real step so lambda != 0
    const ArcResult a1 = solve_unstable_step(solver, state, 4e-4, opt);
    state.prev_fields = state.current.fields;
    state.has_prev = true;
    state.committed = a1.working;
    state.current.fields = a1.fields;
    state.current.lambda = a1.lambda;
    const ArcResult a2 = solve_unstable_step(solver, state, 0.0, opt);
    ASSERT_TRUE(a2.converged);
    EXPECT_NEAR(a2.lambda, a1.lambda, 1e-9 * std::abs(a1.lambda));
}

TEST(SolveUnstableStep, StableRegimeMatchesPrescribedDisplacementSolve)
{
    const SubstructuredModel model = strip_model();
    LatinSolver solver(model);
    AnalysisState state = AnalysisState::initial(model);
    ArcOptions opt = strip_opts();
    const ArcResult ar = solve_unstable_step(solver, state, 4e-4, opt);
    ASSERT_TRUE(ar.converged);
    // cross-check: prescribed-displacement solve at the resulting lambda
    const LatinResult ref = solver.solve_time_point(ar.lambda, state.committed, nullptr, 1e-8, 6000);
    ASSERT_TRUE(ref.converged);
    const Interface& f = model.interfaces[0];
    for (int g = 0; g < f.ngp(); ++g) {
        const Jump ja = jump_at(f, ar.fields.iface[0], g);
        const Jump jb = jump_at(f, ref.s.iface[0], g);
        EXPECT_NEAR(ja.dn, jb.dn, 1e-4 * std::abs(jb.dn));
    }
}

TEST(SolveUnstableStep, FrozenPredictionLeavesDamageBitIdentical)
{
    const SubstructuredModel model = strip_model();
    LatinSolver solver(model);
    ArcOptions opt = strip_opts();
    AnalysisState state = advance(model, solver, 5, 4e-4, opt);

    const DamageHistory before = state.committed;
    FrozenLaws frozen = solver.freeze_laws(state.current.fields, state.committed);
    (void)solver.solve_frozen(1.0, state.committed, frozen, nullptr, opt.frozen_nu_target, 4000);
    ASSERT_EQ(before.size(), state.committed.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        for (std::size_t g = 0; g < before[i].size(); ++g) {
            EXPECT_EQ(before[i][g].d, state.committed[i][g].d);
            EXPECT_EQ(before[i][g].y_hist, state.committed[i][g].y_hist);
        }
    }
}

TEST(SolveUnstableStep, LambdaInvariantUnderLoadPatternScaling)
{
    // scaling the reference load pattern by c scales lambda by 1/c and
    // leaves the predicted fields unchanged
    Scenario sc1 = builtin_scenario("strip");
    Scenario sc2 = builtin_scenario("strip");
    const double c = 5.0;
    for (auto& bc : sc2.bcs)
        if (bc.part == "top") bc.unit_value *= c;
    const SubstructuredModel m1 = build_model(sc1);
    const SubstructuredModel m2 = build_model(sc2);
    LatinSolver s1(m1), s2(m2);
    ArcOptions opt = strip_opts();
    const ArcResult a1 = solve_unstable_step(s1, AnalysisState::initial(m1), 4e-4, opt);
    const ArcResult a2 = solve_unstable_step(s2, AnalysisState::initial(m2), 4e-4, opt);
    ASSERT_TRUE(a1.converged);
    ASSERT_TRUE(a2.converged);
    EXPECT_NEAR(a2.lambda, a1.lambda / c, 1e-9 * std::abs(a1.lambda / c));
    const Jump j1 = jump_at(m1.interfaces[0], a1.fields.iface[0], 0);
    const Jump j2 = jump_at(m2.interfaces[0], a2.fields.iface[0], 0);
    EXPECT_NEAR(j1.dn, j2.dn, 1e-10 * std::abs(j1.dn));
}

TEST(SolveUnstableStep, SnapBackBranchTraversed)
{
    const SubstructuredModel model = strip_model();
    LatinSolver solver(model);
    const Scenario sc = builtin_scenario("strip");
    const OracleStripSolution oracle = strip_oracle(sc);
    ASSERT_TRUE(oracle.has_snap_back());

    AnalysisState state = AnalysisState::initial(model);
    ArcOptions opt = strip_opts();
    const double dl = 4e-4;
    double lam_prev = 0.0;
    double peak_reaction = 0.0;
    bool descending = false;
    for (int k = 1; k <= 16; ++k) {
        const ArcResult ar = solve_unstable_step(solver, state, dl, opt);
        ASSERT_TRUE(ar.converged) << "step " << k;
        // control equation satisfied at acceptance
        EXPECT_NEAR(ar.control_value, dl, 1e-8 * dl);
        // pre-peak branch against the closed-form oracle
        const double w = k * dl;
        if (w <= oracle.w_peak())
            EXPECT_NEAR(ar.lambda, oracle.delta(w) / sc.pull, 0.01 * oracle.delta(w) / sc.pull);
        if (ar.lambda < lam_prev - 1e-12) descending = true;
        lam_prev = ar.lambda;
        state.prev_fields = state.current.fields;
        state.has_prev = true;
        state.committed = ar.working;
        state.current.fields = ar.fields;
        state.current.lambda = ar.lambda;
        state.current.time += dl;
        peak_reaction = std::max(
            peak_reaction, part_reaction(model, state.current.fields, model.reaction_part).y());
    }
    EXPECT_TRUE(descending); // negative-slope branch was traversed
    // fully failed: d = 1 everywhere, reaction ~ 0
    for (const auto& slot : state.committed)
        for (const auto& st : slot) EXPECT_NEAR(st.d, 1.0, 1e-9);
    const double R = part_reaction(model, state.current.fields, model.reaction_part).y();
    EXPECT_LT(std::abs(R), 1e-3 * peak_reaction);
}
