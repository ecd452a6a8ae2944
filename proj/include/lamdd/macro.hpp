#ifndef LAMDD_MACRO_HPP
#define LAMDD_MACRO_HPP

#include "lamdd/fem.hpp"

namespace lamdd {

/// Orthonormal generators of the macro (average) force space of one
/// interface: per-component constants, optionally enriched with linear
/// moments along the interface. Orthonormal for the discrete inner
/// product sum_g w_g u_g . v_g.
struct MacroBasis {
    // each vector stores (x, y) per Gauss point, flattened
    std::vector<std::vector<Vec2>> vectors;

    int size() const { return static_cast<int>(vectors.size()); }
};

inline double macro_dot(const Interface& f, const std::vector<Vec2>& u, const std::vector<Vec2>& v)
{
    double s = 0.0;
    for (int g = 0; g < f.ngp(); ++g)
        s += f.weights[static_cast<std::size_t>(g)] *
             u[static_cast<std::size_t>(g)].dot(v[static_cast<std::size_t>(g)]);
    return s;
}

inline MacroBasis build_macro_basis(const Interface& f, bool with_moments)
{
    MacroBasis basis;
    const double len = f.measure();
    const double inv = 1.0 / std::sqrt(len);
    const std::size_t n = static_cast<std::size_t>(f.ngp());
    basis.vectors.push_back(std::vector<Vec2>(n, Vec2(inv, 0.0)));
    basis.vectors.push_back(std::vector<Vec2>(n, Vec2(0.0, inv)));
    if (with_moments) {
        // centered arclength coordinate along the interface
        double mean = 0.0;
        std::vector<double> s(n);
        for (std::size_t g = 0; g < n; ++g) {
            s[g] = f.points[g].dot(f.tangent);
            mean += f.weights[g] * s[g];
        }
        mean /= len;
        double norm2 = 0.0;
        for (std::size_t g = 0; g < n; ++g) {
            s[g] -= mean;
            norm2 += f.weights[g] * s[g] * s[g];
        }
        if (norm2 > 0.0) {
            const double inv_m = 1.0 / std::sqrt(norm2);
            std::vector<Vec2> mx(n), my(n);
            for (std::size_t g = 0; g < n; ++g) {
                mx[g] = Vec2(s[g] * inv_m, 0.0);
                my[g] = Vec2(0.0, s[g] * inv_m);
            }
            basis.vectors.push_back(std::move(mx));
            basis.vectors.push_back(std::move(my));
        }
    }
    return basis;
}

/// L2-orthogonal projection of an interface force distribution onto the
/// macro space.
inline std::vector<Vec2> macro_project(const Interface& f, const MacroBasis& basis,
                                       const std::vector<Vec2>& F)
{
    std::vector<Vec2> out(F.size(), Vec2::Zero());
    for (const auto& e : basis.vectors) {
        const double c = macro_dot(f, F, e);
        for (std::size_t g = 0; g < F.size(); ++g) out[g] += c * e[g];
    }
    return out;
}

/// The small global coarse problem enforcing the macro balance
/// Pi(F_E + F_E') = 0 on every internal interface, condensed once from the
/// substructures' Robin responses to unit macro loads and reused for the
/// whole analysis.
class CoarseProblem {
public:
    CoarseProblem() = default;

    CoarseProblem(const SubstructuredModel& model,
                  const std::vector<std::unique_ptr<SubstructureOperator>>& ops,
                  bool with_moments)
        : model_(&model)
    {
        bases_.resize(model.interfaces.size());
        offsets_.assign(model.interfaces.size(), -1);
        int ndof = 0;
        for (const auto& f : model.interfaces) {
            bases_[static_cast<std::size_t>(f.id)] = build_macro_basis(f, with_moments);
            if (f.sub_b >= 0) { // internal interfaces carry multipliers
                offsets_[static_cast<std::size_t>(f.id)] = ndof;
                ndof += bases_[static_cast<std::size_t>(f.id)].size();
            }
        }
        ndof_ = ndof;
        if (ndof_ == 0) return;

        const double km = model.k_minus;
        MatX M = MatX::Zero(ndof_, ndof_);
        for (int i = 0; i < ndof_; ++i) M(i, i) = 2.0 * km;

        // Robin responses of each substructure to unit macro loads.
        for (std::size_t e = 0; e < model.subs.size(); ++e) {
            const auto& op = *ops[e];
            const auto& ifs = op.interfaces();
            for (std::size_t lj = 0; lj < ifs.size(); ++lj) {
                const int fj = ifs[lj].first;
                if (offsets_[static_cast<std::size_t>(fj)] < 0) continue;
                const auto& bj = bases_[static_cast<std::size_t>(fj)];
                for (int mj = 0; mj < bj.size(); ++mj) {
                    VecX rhs = VecX::Zero(op.ndof());
                    std::vector<Vec2> load = bj.vectors[static_cast<std::size_t>(mj)];
                    for (auto& v : load) v *= km;
                    op.add_interface_load(static_cast<int>(lj), load, rhs);
                    const VecX u = op.solve(rhs);
                    for (std::size_t li = 0; li < ifs.size(); ++li) {
                        const int fi = ifs[li].first;
                        if (offsets_[static_cast<std::size_t>(fi)] < 0) continue;
                        const auto& bi = bases_[static_cast<std::size_t>(fi)];
                        std::vector<Vec2> W;
                        op.extract_trace(static_cast<int>(li), u, W);
                        for (int mi = 0; mi < bi.size(); ++mi) {
                            const double z = macro_dot(model.interfaces[static_cast<std::size_t>(fi)],
                                                       W, bi.vectors[static_cast<std::size_t>(mi)]);
                            M(offsets_[static_cast<std::size_t>(fi)] + mi,
                              offsets_[static_cast<std::size_t>(fj)] + mj) -= km * z;
                        }
                    }
                }
            }
        }
        ldlt_.compute(M);
        if (ldlt_.info() != Eigen::Success)
            throw solver_error("coarse problem: singular macro system (insufficient Dirichlet constraints)");
    }

    bool active() const { return ndof_ > 0; }
    int ndof() const { return ndof_; }
    const MacroBasis& basis(int iface) const { return bases_[static_cast<std::size_t>(iface)]; }
    int offset(int iface) const { return offsets_[static_cast<std::size_t>(iface)]; }

    /// Multipliers for a given macro imbalance r (coefficients of
    /// Pi(F_a + F_b) per interface), solving M lambda = -r.
    VecX multipliers(const VecX& r) const { return ldlt_.solve(-r); }

    /// Macro imbalance coefficients of the current interface forces.
    VecX imbalance(const Fields& s) const
    {
        VecX r = VecX::Zero(ndof_);
        for (const auto& f : model_->interfaces) {
            const int off = offsets_[static_cast<std::size_t>(f.id)];
            if (off < 0) continue;
            const auto& b = bases_[static_cast<std::size_t>(f.id)];
            const InterfaceField& fld = s.iface[static_cast<std::size_t>(f.id)];
            std::vector<Vec2> sum(fld.F_a.size());
            for (std::size_t g = 0; g < sum.size(); ++g) sum[g] = fld.F_a[g] + fld.F_b[g];
            for (int m = 0; m < b.size(); ++m)
                r(off + m) = macro_dot(f, sum, b.vectors[static_cast<std::size_t>(m)]);
        }
        return r;
    }

private:
    const SubstructuredModel* model_ = nullptr;
    std::vector<MacroBasis> bases_;
    std::vector<int> offsets_;
    int ndof_ = 0;
    Eigen::LDLT<MatX> ldlt_;
};

} // namespace lamdd

#endif // LAMDD_MACRO_HPP
