#ifndef LAMDD_FEM_HPP
#define LAMDD_FEM_HPP

#include "lamdd/fields.hpp"

#include <Eigen/SparseCholesky>

#include <atomic>
#include <memory>

namespace lamdd {

/// Direct-solver invocation counters, shared across the substructure
/// operators of one model.
struct SolveStats {
    std::atomic<long> factorizations{0};
    std::atomic<long> backsubs{0};
};

/// Element stiffness of a bilinear quad in plane strain, 2x2 Gauss.
inline Eigen::Matrix<double, 8, 8> quad_stiffness(const std::array<Vec2, 4>& xy, const Mat3& D)
{
    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    const double g = 1.0 / std::sqrt(3.0);
    for (double eta : {-g, g}) {
        for (double xi : {-g, g}) {
            const double dndxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
            const double dndeta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
            Mat2 J = Mat2::Zero();
            for (int a = 0; a < 4; ++a) {
                J(0, 0) += dndxi[a] * xy[static_cast<std::size_t>(a)].x();
                J(0, 1) += dndxi[a] * xy[static_cast<std::size_t>(a)].y();
                J(1, 0) += dndeta[a] * xy[static_cast<std::size_t>(a)].x();
                J(1, 1) += dndeta[a] * xy[static_cast<std::size_t>(a)].y();
            }
            const double detJ = J.determinant();
            if (detJ <= 0.0) throw solver_error("degenerate element (non-positive jacobian)");
            const Mat2 Jinv = J.inverse();
            Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
            for (int a = 0; a < 4; ++a) {
                const double dndx = Jinv(0, 0) * dndxi[a] + Jinv(0, 1) * dndeta[a];
                const double dndy = Jinv(1, 0) * dndxi[a] + Jinv(1, 1) * dndeta[a];
                B(0, 2 * a) = dndx;
                B(1, 2 * a + 1) = dndy;
                B(2, 2 * a) = dndy;
                B(2, 2 * a + 1) = dndx;
            }
            ke += B.transpose() * D * B * detJ;
        }
    }
    return ke;
}

/// Assembled sparse stiffness of one substructure. Satisfies K u = 0 for
/// rigid translations.
inline SpMat assemble_stiffness(const GridMesh& mesh, const PlyMaterial& mat)
{
    if (!mat.positive_definite())
        throw solver_error("assemble: elasticity tensor not positive definite");
    const int ndof = 2 * mesh.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * 64);
    for (int ej = 0; ej < mesh.ny(); ++ej) {
        for (int ei = 0; ei < mesh.nx(); ++ei) {
            const auto nodes = mesh.element_nodes(ei, ej);
            std::array<Vec2, 4> xy;
            for (int a = 0; a < 4; ++a) xy[static_cast<std::size_t>(a)] = mesh.coord(nodes[static_cast<std::size_t>(a)]);
            Eigen::Matrix<double, 8, 8> ke;
            try {
                ke = quad_stiffness(xy, mat.D);
            } catch (const solver_error&) {
                throw solver_error("degenerate element (" + std::to_string(ei) + ", " + std::to_string(ej) + ")");
            }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int da = 0; da < 2; ++da)
                        for (int db = 0; db < 2; ++db)
                            trip.emplace_back(2 * nodes[static_cast<std::size_t>(a)] + da,
                                              2 * nodes[static_cast<std::size_t>(b)] + db,
                                              ke(2 * a + da, 2 * b + db));
        }
    }
    SpMat K(ndof, ndof);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

/// Stress (Voigt xx, yy, xy) at the 2x2 Gauss points of every element,
/// by direct constitutive evaluation of the displacement gradient.
inline std::vector<Vec3> stress_at_gauss(const GridMesh& mesh, const PlyMaterial& mat, const VecX& u)
{
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(4 * mesh.num_elements()));
    const double g = 1.0 / std::sqrt(3.0);
    for (int ej = 0; ej < mesh.ny(); ++ej) {
        for (int ei = 0; ei < mesh.nx(); ++ei) {
            const auto nodes = mesh.element_nodes(ei, ej);
            std::array<Vec2, 4> xy;
            Eigen::Matrix<double, 8, 1> ue;
            for (int a = 0; a < 4; ++a) {
                xy[static_cast<std::size_t>(a)] = mesh.coord(nodes[static_cast<std::size_t>(a)]);
                ue(2 * a) = u(2 * nodes[static_cast<std::size_t>(a)]);
                ue(2 * a + 1) = u(2 * nodes[static_cast<std::size_t>(a)] + 1);
            }
            for (double eta : {-g, g}) {
                for (double xi : {-g, g}) {
                    const double dndxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
                    const double dndeta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
                    Mat2 J = Mat2::Zero();
                    for (int a = 0; a < 4; ++a) {
                        J(0, 0) += dndxi[a] * xy[static_cast<std::size_t>(a)].x();
                        J(0, 1) += dndxi[a] * xy[static_cast<std::size_t>(a)].y();
                        J(1, 0) += dndeta[a] * xy[static_cast<std::size_t>(a)].x();
                        J(1, 1) += dndeta[a] * xy[static_cast<std::size_t>(a)].y();
                    }
                    const Mat2 Jinv = J.inverse();
                    Vec3 eps = Vec3::Zero();
                    for (int a = 0; a < 4; ++a) {
                        const double dndx = Jinv(0, 0) * dndxi[a] + Jinv(0, 1) * dndeta[a];
                        const double dndy = Jinv(1, 0) * dndxi[a] + Jinv(1, 1) * dndeta[a];
                        eps[0] += dndx * ue(2 * a);
                        eps[1] += dndy * ue(2 * a + 1);
                        eps[2] += dndy * ue(2 * a) + dndx * ue(2 * a + 1);
                    }
                    out.push_back(mat.D * eps);
                }
            }
        }
    }
    return out;
}

/// Strong (nodal) constraints, used by the monolithic oracle path and the
/// direct Robin solves in tests. The LaTIn path imposes boundary data
/// through boundary interfaces instead.
struct StrongDirichlet {
    std::vector<int> dofs;
    std::vector<double> values;
};

/// Per-substructure linear operator: assembled stiffness, Robin-augmented
/// matrix K + k_minus * M_Gamma over all its interfaces, and the cached
/// factorization. Read-only after construction; solves are const and safe
/// to call concurrently.
class SubstructureOperator {
public:
    SubstructureOperator(const SubstructuredModel& model, int sub_id, double k_minus,
                         std::shared_ptr<SolveStats> stats, const StrongDirichlet* strong = nullptr)
        : model_(&model), sub_(sub_id), k_minus_(k_minus), stats_(std::move(stats))
    {
        const Substructure& s = model.subs[static_cast<std::size_t>(sub_id)];
        ndof_ = 2 * s.mesh.num_nodes();
        K_ = assemble_stiffness(s.mesh, s.material);
        ifaces_ = model.sub_interfaces[static_cast<std::size_t>(sub_id)];

        SpMat A = K_;
        {
            std::vector<Eigen::Triplet<double>> trip;
            for (const auto& [fi, side] : ifaces_) {
                const Interface& f = model.interfaces[static_cast<std::size_t>(fi)];
                const Interface::Trace& tr = side == 0 ? f.trace_a : f.trace_b;
                for (int g = 0; g < f.ngp(); ++g) {
                    const double w = f.weights[static_cast<std::size_t>(g)] * k_minus_;
                    const int n0 = tr.node0[static_cast<std::size_t>(g)], n1 = tr.node1[static_cast<std::size_t>(g)];
                    const double s0 = tr.shape0[static_cast<std::size_t>(g)], s1 = tr.shape1[static_cast<std::size_t>(g)];
                    for (int d = 0; d < 2; ++d) {
                        trip.emplace_back(2 * n0 + d, 2 * n0 + d, w * s0 * s0);
                        trip.emplace_back(2 * n0 + d, 2 * n1 + d, w * s0 * s1);
                        trip.emplace_back(2 * n1 + d, 2 * n0 + d, w * s1 * s0);
                        trip.emplace_back(2 * n1 + d, 2 * n1 + d, w * s1 * s1);
                    }
                }
            }
            SpMat M(ndof_, ndof_);
            M.setFromTriplets(trip.begin(), trip.end());
            A += M;
        }

        if (strong) {
            fixed_dofs_ = strong->dofs;
            fixed_values_ = strong->values;
        }
        if (ifaces_.empty() && fixed_dofs_.empty())
            throw solver_error("substructure " + std::to_string(sub_id) +
                               ": no interface and no constraint, operator is singular");

        // Reduced numbering when strong constraints are present.
        reduce_map_.assign(static_cast<std::size_t>(ndof_), -1);
        std::vector<char> fixed(static_cast<std::size_t>(ndof_), 0);
        for (int d : fixed_dofs_) fixed[static_cast<std::size_t>(d)] = 1;
        int nred = 0;
        for (int i = 0; i < ndof_; ++i)
            if (!fixed[static_cast<std::size_t>(i)]) reduce_map_[static_cast<std::size_t>(i)] = nred++;
        nred_ = nred;

        if (fixed_dofs_.empty()) {
            Ared_ = A;
        } else {
            std::vector<Eigen::Triplet<double>> trip;
            Kfc_.resize(nred_, ndof_ - nred_);
            std::vector<Eigen::Triplet<double>> tfc;
            std::vector<int> fixed_index(static_cast<std::size_t>(ndof_), -1);
            {
                int k = 0;
                for (int d : fixed_dofs_) fixed_index[static_cast<std::size_t>(d)] = k++;
            }
            for (int k = 0; k < A.outerSize(); ++k) {
                for (SpMat::InnerIterator it(A, k); it; ++it) {
                    const int r = reduce_map_[static_cast<std::size_t>(it.row())];
                    const int c = reduce_map_[static_cast<std::size_t>(it.col())];
                    if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
                    else if (r >= 0 && c < 0)
                        tfc.emplace_back(r, fixed_index[static_cast<std::size_t>(it.col())], it.value());
                }
            }
            Ared_.resize(nred_, nred_);
            Ared_.setFromTriplets(trip.begin(), trip.end());
            Kfc_.setFromTriplets(tfc.begin(), tfc.end());
        }

        ldlt_.compute(Ared_);
        if (stats_) stats_->factorizations.fetch_add(1, std::memory_order_relaxed);
        if (ldlt_.info() != Eigen::Success)
            throw solver_error("substructure " + std::to_string(sub_id) + ": singular factorization");
    }

    int ndof() const { return ndof_; }
    const SpMat& stiffness() const { return K_; }
    const std::vector<std::pair<int, int>>& interfaces() const { return ifaces_; }
    double k_minus() const { return k_minus_; }

    /// Adds T^t diag(w) g to the load vector for one of this substructure's
    /// interfaces (local index into interfaces()).
    void add_interface_load(int local_iface, const std::vector<Vec2>& g, VecX& rhs) const
    {
        const auto& [fi, side] = ifaces_[static_cast<std::size_t>(local_iface)];
        const Interface& f = model_->interfaces[static_cast<std::size_t>(fi)];
        const Interface::Trace& tr = side == 0 ? f.trace_a : f.trace_b;
        for (int k = 0; k < f.ngp(); ++k) {
            const double w = f.weights[static_cast<std::size_t>(k)];
            const int n0 = tr.node0[static_cast<std::size_t>(k)], n1 = tr.node1[static_cast<std::size_t>(k)];
            const double s0 = tr.shape0[static_cast<std::size_t>(k)], s1 = tr.shape1[static_cast<std::size_t>(k)];
            for (int d = 0; d < 2; ++d) {
                rhs(2 * n0 + d) += w * s0 * g[static_cast<std::size_t>(k)](d);
                rhs(2 * n1 + d) += w * s1 * g[static_cast<std::size_t>(k)](d);
            }
        }
    }

    /// Trace of u on one of this substructure's interfaces.
    void extract_trace(int local_iface, const VecX& u, std::vector<Vec2>& W) const
    {
        const auto& [fi, side] = ifaces_[static_cast<std::size_t>(local_iface)];
        const Interface& f = model_->interfaces[static_cast<std::size_t>(fi)];
        const Interface::Trace& tr = side == 0 ? f.trace_a : f.trace_b;
        W.resize(static_cast<std::size_t>(f.ngp()));
        for (int k = 0; k < f.ngp(); ++k) {
            const int n0 = tr.node0[static_cast<std::size_t>(k)], n1 = tr.node1[static_cast<std::size_t>(k)];
            const double s0 = tr.shape0[static_cast<std::size_t>(k)], s1 = tr.shape1[static_cast<std::size_t>(k)];
            W[static_cast<std::size_t>(k)] = Vec2(s0 * u(2 * n0) + s1 * u(2 * n1),
                                                  s0 * u(2 * n0 + 1) + s1 * u(2 * n1 + 1));
        }
    }

    /// Solves (K + k_minus M) u = rhs with the cached factorization,
    /// applying strong constraints when present.
    VecX solve(const VecX& rhs) const
    {
        if (stats_) stats_->backsubs.fetch_add(1, std::memory_order_relaxed);
        if (fixed_dofs_.empty()) {
            return ldlt_.solve(rhs);
        }
        VecX uc = Eigen::Map<const VecX>(fixed_values_.data(), static_cast<long>(fixed_values_.size()));
        VecX br(nred_);
        for (int i = 0; i < ndof_; ++i)
            if (reduce_map_[static_cast<std::size_t>(i)] >= 0) br(reduce_map_[static_cast<std::size_t>(i)]) = rhs(i);
        br -= Kfc_ * uc;
        VecX ur = ldlt_.solve(br);
        VecX u(ndof_);
        {
            int k = 0;
            for (int i = 0; i < ndof_; ++i) {
                if (reduce_map_[static_cast<std::size_t>(i)] >= 0) u(i) = ur(reduce_map_[static_cast<std::size_t>(i)]);
                else u(i) = fixed_values_[static_cast<std::size_t>(k)], ++k;
            }
        }
        return u;
    }

private:
    const SubstructuredModel* model_;
    int sub_ = -1;
    int ndof_ = 0;
    int nred_ = 0;
    double k_minus_ = 0.0;
    SpMat K_;
    SpMat Ared_;
    SpMat Kfc_;
    std::vector<std::pair<int, int>> ifaces_;
    std::vector<int> fixed_dofs_;
    std::vector<double> fixed_values_;
    std::vector<int> reduce_map_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    std::shared_ptr<SolveStats> stats_;
};

/// State of one substructure after a Robin solve: nodal displacement and
/// interface traces/tractions aligned with SubstructureOperator::interfaces().
struct SubstructureState {
    VecX u;
    std::vector<std::vector<Vec2>> W; // per local interface
    std::vector<std::vector<Vec2>> F;
};

/// Robin solve of one substructure: given hat data (W_hat, F_hat) on each
/// of its interfaces, solves equilibrium with F = F_hat - k_minus (W - W_hat)
/// and returns traces and tractions evaluated at the interface Gauss points.
inline SubstructureState robin_solve(const SubstructureOperator& op,
                                     const std::vector<const std::vector<Vec2>*>& W_hat,
                                     const std::vector<const std::vector<Vec2>*>& F_hat)
{
    const double km = op.k_minus();
    VecX rhs = VecX::Zero(op.ndof());
    std::vector<std::vector<Vec2>> g(op.interfaces().size());
    for (std::size_t li = 0; li < op.interfaces().size(); ++li) {
        const auto& Wv = *W_hat[li];
        const auto& Fv = *F_hat[li];
        g[li].resize(Wv.size());
        for (std::size_t k = 0; k < Wv.size(); ++k) g[li][k] = Fv[k] + km * Wv[k];
        op.add_interface_load(static_cast<int>(li), g[li], rhs);
    }
    SubstructureState st;
    st.u = op.solve(rhs);
    st.W.resize(op.interfaces().size());
    st.F.resize(op.interfaces().size());
    for (std::size_t li = 0; li < op.interfaces().size(); ++li) {
        op.extract_trace(static_cast<int>(li), st.u, st.W[li]);
        st.F[li].resize(st.W[li].size());
        for (std::size_t k = 0; k < st.W[li].size(); ++k)
            st.F[li][k] = g[li][k] - km * st.W[li][k];
    }
    return st;
}

/// FE-discrete dual norm of the substructure equilibrium residual of the
/// whole structure, relative to the interface load norm. Zero for any
/// state produced by a linear stage; stays small for convex combinations
/// of admissible states.
inline double equilibrium_residual(const SubstructuredModel& model,
                                   const std::vector<std::unique_ptr<SubstructureOperator>>& ops,
                                   const Fields& s, double* res_abs = nullptr,
                                   double* load_scale = nullptr)
{
    double res2 = 0.0;
    double load2 = 0.0; // cancellation-free traction scale
    for (std::size_t e = 0; e < model.subs.size(); ++e) {
        const auto& op = *ops[e];
        VecX b = VecX::Zero(op.ndof());
        for (std::size_t li = 0; li < op.interfaces().size(); ++li) {
            const auto& [fi, side] = op.interfaces()[li];
            const Interface& f = model.interfaces[static_cast<std::size_t>(fi)];
            const InterfaceField& fld = s.iface[static_cast<std::size_t>(fi)];
            const auto& Fv = side == 0 ? fld.F_a : fld.F_b;
            op.add_interface_load(static_cast<int>(li), Fv, b);
            for (int g = 0; g < f.ngp(); ++g)
                load2 += sqr(f.weights[static_cast<std::size_t>(g)]) *
                         Fv[static_cast<std::size_t>(g)].squaredNorm();
        }
        const VecX r = op.stiffness() * s.u[e] - b;
        res2 += r.squaredNorm();
    }
    const double load = std::sqrt(load2);
    const double res = std::sqrt(res2);
    if (res_abs) *res_abs = res;
    if (load_scale) *load_scale = load;
    return load > 0.0 ? res / load : res;
}

} // namespace lamdd

#endif // LAMDD_FEM_HPP
