#ifndef LAMDD_MODEL_HPP
#define LAMDD_MODEL_HPP

#include "lamdd/scenario.hpp"

#include <array>
#include <cmath>

namespace lamdd {

/// Structured rectangle mesh of bilinear quads.
struct GridMesh {
    std::vector<double> xs; // node coordinate lines, ascending
    std::vector<double> ys;

    int nx() const { return static_cast<int>(xs.size()) - 1; }
    int ny() const { return static_cast<int>(ys.size()) - 1; }
    int num_nodes() const { return static_cast<int>(xs.size() * ys.size()); }
    int num_elements() const { return nx() * ny(); }
    int node(int i, int j) const { return j * (nx() + 1) + i; }
    Vec2 coord(int node_id) const
    {
        const int w = nx() + 1;
        return Vec2(xs[static_cast<std::size_t>(node_id % w)], ys[static_cast<std::size_t>(node_id / w)]);
    }
    /// Element (ei, ej) corner nodes in counterclockwise order.
    std::array<int, 4> element_nodes(int ei, int ej) const
    {
        return {node(ei, ej), node(ei + 1, ej), node(ei + 1, ej + 1), node(ei, ej + 1)};
    }
    double area() const { return (xs.back() - xs.front()) * (ys.back() - ys.front()); }
};

struct Substructure {
    int id = -1;
    int ply = -1; // 0-based, bottom to top
    GridMesh mesh;
    PlyMaterial material;
};

enum class InterfaceKind { perfect, cohesive, contact, boundary_dirichlet, boundary_neumann };

inline bool is_boundary(InterfaceKind k)
{
    return k == InterfaceKind::boundary_dirichlet || k == InterfaceKind::boundary_neumann;
}

/// A straight decomposition interface carrying matched Gauss points. Side a
/// belongs to sub_a, side b to sub_b (absent for boundary interfaces). The
/// normal points from side a to side b (outward for boundary interfaces).
struct Interface {
    struct Trace {
        // per Gauss point: the two edge nodes and their linear shape values
        std::vector<int> node0, node1;
        std::vector<double> shape0, shape1;
    };

    int id = -1;
    InterfaceKind kind = InterfaceKind::perfect;
    int sub_a = -1;
    int sub_b = -1;
    Vec2 normal = Vec2::Zero();
    Vec2 tangent = Vec2::Zero();
    std::vector<Vec2> points;
    std::vector<double> weights;
    Trace trace_a, trace_b;
    std::string part;              // boundary part name
    Vec2 bc_unit = Vec2::Zero();   // boundary data at amplitude 1
    int pair_index = 0;            // 1-based ply-pair index for ply interfaces
    int cohesive_index = -1;       // slot in per-analysis damage arrays
    int contact_index = -1;        // slot in per-analysis contact-branch arrays

    int ngp() const { return static_cast<int>(points.size()); }
    double measure() const
    {
        double m = 0.0;
        for (double w : weights) m += w;
        return m;
    }
};

struct SubstructuredModel {
    std::vector<Substructure> subs;
    std::vector<Interface> interfaces;
    CohesiveMaterial cohesive;
    double k_plus = 0.0;
    double k_minus = 0.0;
    SolverParams solver;
    LoadProgram program;
    std::string reaction_part;
    double total_area = 0.0;
    int num_cohesive = 0; // number of cohesive interfaces
    int num_contact = 0;

    // per substructure: (interface index, side 0=a / 1=b)
    std::vector<std::vector<std::pair<int, int>>> sub_interfaces;

    const Interface& iface(int i) const { return interfaces[static_cast<std::size_t>(i)]; }

    std::vector<int> interfaces_of_kind(InterfaceKind k) const
    {
        std::vector<int> out;
        for (const auto& f : interfaces)
            if (f.kind == k) out.push_back(f.id);
        return out;
    }
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int cells)
{
    std::vector<double> v(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(cells);
    v.front() = a;
    v.back() = b;
    return v;
}

/// Gauss points/weights and trace data along a node line given by `coords`
/// (ascending). Two-point rule per cell; weights carry the segment jacobian.
inline void edge_gauss(const std::vector<double>& coords,
                       const std::function<Vec2(double)>& to_xy,
                       const std::function<std::pair<int, int>(int)>& cell_nodes,
                       Interface& iface, Interface::Trace& trace, bool fill_points)
{
    const double g = 1.0 / std::sqrt(3.0);
    for (std::size_t c = 0; c + 1 < coords.size(); ++c) {
        const double s0 = coords[c], s1 = coords[c + 1];
        const double half = 0.5 * (s1 - s0);
        const double mid = 0.5 * (s0 + s1);
        auto [n0, n1] = cell_nodes(static_cast<int>(c));
        for (double xi : {-g, g}) {
            const double s = mid + half * xi;
            if (fill_points) {
                iface.points.push_back(to_xy(s));
                iface.weights.push_back(half);
            }
            trace.node0.push_back(n0);
            trace.node1.push_back(n1);
            trace.shape0.push_back(0.5 * (1.0 - xi));
            trace.shape1.push_back(0.5 * (1.0 + xi));
        }
    }
}

enum class RectEdge { bottom, top, left, right };

/// Builds the trace of a rectangle substructure edge over the full span.
inline void build_edge_trace(const GridMesh& mesh, RectEdge edge, Interface& iface,
                             Interface::Trace& trace, bool fill_points)
{
    if (edge == RectEdge::bottom || edge == RectEdge::top) {
        const int j = edge == RectEdge::bottom ? 0 : mesh.ny();
        const double y = edge == RectEdge::bottom ? mesh.ys.front() : mesh.ys.back();
        edge_gauss(
            mesh.xs, [y](double s) { return Vec2(s, y); },
            [&mesh, j](int c) { return std::make_pair(mesh.node(c, j), mesh.node(c + 1, j)); },
            iface, trace, fill_points);
    } else {
        const int i = edge == RectEdge::left ? 0 : mesh.nx();
        const double x = edge == RectEdge::left ? mesh.xs.front() : mesh.xs.back();
        edge_gauss(
            mesh.ys, [x](double s) { return Vec2(x, s); },
            [&mesh, i](int c) { return std::make_pair(mesh.node(i, c), mesh.node(i, c + 1)); },
            iface, trace, fill_points);
    }
}

} // namespace detail

/// Builds the substructured model: one substructure per (ply, span range),
/// ply-pair interfaces matched Gauss point by Gauss point, perfect
/// interfaces at intra-ply cuts and boundary interfaces for the loaded
/// parts. Decomposition interfaces coincide with the cohesive interfaces.
inline SubstructuredModel build_model(const Scenario& sc)
{
    SubstructuredModel model;
    model.cohesive = sc.cohesive;
    model.k_plus = sc.effective_k_plus();
    model.k_minus = sc.effective_k_minus();
    model.solver = sc.solver;
    model.program = sc.program;
    model.reaction_part = sc.reaction_part;

    const int np = sc.num_plies();
    const double L = sc.length;

    // Global x grid and station indices (stations snapped to grid lines).
    const std::vector<double> gx = detail::linspace(0.0, L, sc.elements_x);
    std::vector<int> stations; // interior grid indices, ascending
    auto add_station = [&](double x, const std::string& what) {
        int gi = static_cast<int>(std::lround(x / L * sc.elements_x));
        if (gi <= 0 || gi >= sc.elements_x)
            throw config_error("station for " + what + " collapses onto a boundary; refine elements_x");
        stations.push_back(gi);
    };
    for (int s = 1; s < sc.substructures_x; ++s)
        add_station(L * static_cast<double>(s) / sc.substructures_x, "substructure split");
    int crack_station = -1;
    if (sc.geometry == GeometryKind::dcb2d && sc.crack_fraction > 0.0) {
        add_station(sc.crack_fraction * L, "initial crack front");
        crack_station = stations.back();
    }
    int notch_station = -1;
    if (sc.geometry == GeometryKind::notched_plate2d && sc.notch_plies > 0) {
        add_station(sc.notch_fraction * L, "notch");
        notch_station = stations.back();
    }
    std::sort(stations.begin(), stations.end());
    stations.erase(std::unique(stations.begin(), stations.end()), stations.end());

    std::vector<int> bounds; // grid indices of range boundaries
    bounds.push_back(0);
    for (int s : stations) bounds.push_back(s);
    bounds.push_back(sc.elements_x);
    const int nranges = static_cast<int>(bounds.size()) - 1;

    // Ply y grids.
    std::vector<std::vector<double>> ply_ys(static_cast<std::size_t>(np));
    double y0 = 0.0;
    for (int p = 0; p < np; ++p) {
        const double h = sc.plies[static_cast<std::size_t>(p)].thickness;
        ply_ys[static_cast<std::size_t>(p)] = detail::linspace(y0, y0 + h, sc.elements_y);
        y0 += h;
    }

    // Substructures.
    auto sub_id = [&](int p, int r) { return p * nranges + r; };
    for (int p = 0; p < np; ++p) {
        for (int r = 0; r < nranges; ++r) {
            Substructure s;
            s.id = sub_id(p, r);
            s.ply = p;
            s.mesh.xs.assign(gx.begin() + bounds[static_cast<std::size_t>(r)],
                             gx.begin() + bounds[static_cast<std::size_t>(r) + 1] + 1);
            s.mesh.ys = ply_ys[static_cast<std::size_t>(p)];
            s.material = sc.plies[static_cast<std::size_t>(p)].material;
            model.subs.push_back(std::move(s));
        }
    }

    const int median_pair = np / 2; // 1-based pair index carrying the dcb pre-crack

    auto new_interface = [&](InterfaceKind kind) -> Interface& {
        Interface f;
        f.id = static_cast<int>(model.interfaces.size());
        f.kind = kind;
        model.interfaces.push_back(std::move(f));
        return model.interfaces.back();
    };

    // Ply-pair interfaces (horizontal), one object per span range.
    for (int q = 1; q < np; ++q) { // 1-based pair index: plies q-1 and q (0-based)
        for (int r = 0; r < nranges; ++r) {
            InterfaceAssign assign = sc.pair_kind(q);
            if (sc.geometry == GeometryKind::dcb2d && q == median_pair && crack_station > 0 &&
                bounds[static_cast<std::size_t>(r) + 1] <= crack_station)
                assign = InterfaceAssign::contact;
            InterfaceKind kind = assign == InterfaceAssign::cohesive ? InterfaceKind::cohesive
                                 : assign == InterfaceAssign::contact ? InterfaceKind::contact
                                                                      : InterfaceKind::perfect;
            Interface& f = new_interface(kind);
            f.sub_a = sub_id(q - 1, r);
            f.sub_b = sub_id(q, r);
            f.normal = Vec2(0.0, 1.0);
            f.tangent = Vec2(-f.normal.y(), f.normal.x());
            f.pair_index = q;
            detail::build_edge_trace(model.subs[static_cast<std::size_t>(f.sub_a)].mesh,
                                     detail::RectEdge::top, f, f.trace_a, true);
            detail::build_edge_trace(model.subs[static_cast<std::size_t>(f.sub_b)].mesh,
                                     detail::RectEdge::bottom, f, f.trace_b, false);
        }
    }

    // Intra-ply vertical interfaces at interior stations (perfect), except
    // the free notch cut in the notched plies.
    for (int p = 0; p < np; ++p) {
        for (int r = 0; r + 1 < nranges; ++r) {
            const int station = bounds[static_cast<std::size_t>(r) + 1];
            if (notch_station > 0 && station == notch_station && p < sc.notch_plies)
                continue; // traction-free notch faces
            Interface& f = new_interface(InterfaceKind::perfect);
            f.sub_a = sub_id(p, r);
            f.sub_b = sub_id(p, r + 1);
            f.normal = Vec2(1.0, 0.0);
            f.tangent = Vec2(-f.normal.y(), f.normal.x());
            detail::build_edge_trace(model.subs[static_cast<std::size_t>(f.sub_a)].mesh,
                                     detail::RectEdge::right, f, f.trace_a, true);
            detail::build_edge_trace(model.subs[static_cast<std::size_t>(f.sub_b)].mesh,
                                     detail::RectEdge::left, f, f.trace_b, false);
        }
    }

    // Boundary interfaces for loaded parts.
    auto add_boundary = [&](const BoundaryCondition& bc, int sub, detail::RectEdge edge, Vec2 n) {
        if (bc.kind == BcKind::free_boundary) return;
        Interface& f = new_interface(bc.kind == BcKind::dirichlet ? InterfaceKind::boundary_dirichlet
                                                                  : InterfaceKind::boundary_neumann);
        f.sub_a = sub;
        f.normal = n;
        f.tangent = Vec2(-n.y(), n.x());
        f.part = bc.part;
        f.bc_unit = bc.unit_value;
        detail::build_edge_trace(model.subs[static_cast<std::size_t>(sub)].mesh, edge, f, f.trace_a, true);
    };

    for (const auto& bc : sc.bcs) {
        if (sc.geometry == GeometryKind::dcb2d) {
            if (bc.part == "arm_top")
                add_boundary(bc, sub_id(np - 1, 0), detail::RectEdge::left, Vec2(-1.0, 0.0));
            else if (bc.part == "arm_bottom")
                add_boundary(bc, sub_id(0, 0), detail::RectEdge::left, Vec2(-1.0, 0.0));
            else if (bc.part == "end")
                for (int p = 0; p < np; ++p)
                    add_boundary(bc, sub_id(p, nranges - 1), detail::RectEdge::right, Vec2(1.0, 0.0));
        } else if (sc.geometry == GeometryKind::strip2d) {
            if (bc.part == "bottom")
                for (int r = 0; r < nranges; ++r)
                    add_boundary(bc, sub_id(0, r), detail::RectEdge::bottom, Vec2(0.0, -1.0));
            else if (bc.part == "top")
                for (int r = 0; r < nranges; ++r)
                    add_boundary(bc, sub_id(np - 1, r), detail::RectEdge::top, Vec2(0.0, 1.0));
        } else {
            if (bc.part == "left")
                for (int p = 0; p < np; ++p)
                    add_boundary(bc, sub_id(p, 0), detail::RectEdge::left, Vec2(-1.0, 0.0));
            else if (bc.part == "right")
                for (int p = 0; p < np; ++p)
                    add_boundary(bc, sub_id(p, nranges - 1), detail::RectEdge::right, Vec2(1.0, 0.0));
        }
    }

    // Index cohesive interfaces and substructure incidence.
    model.sub_interfaces.resize(model.subs.size());
    for (auto& f : model.interfaces) {
        if (f.kind == InterfaceKind::cohesive) f.cohesive_index = model.num_cohesive++;
        if (f.kind == InterfaceKind::contact) f.contact_index = model.num_contact++;
        model.sub_interfaces[static_cast<std::size_t>(f.sub_a)].push_back({f.id, 0});
        if (f.sub_b >= 0) model.sub_interfaces[static_cast<std::size_t>(f.sub_b)].push_back({f.id, 1});
    }

    for (const auto& s : model.subs) model.total_area += s.mesh.area();
    const double expected = L * sc.total_thickness();
    if (std::abs(model.total_area - expected) > 1e-10 * expected)
        throw config_error("mesh generation: substructure areas do not tile the geometry");

    return model;
}

} // namespace lamdd

#endif // LAMDD_MODEL_HPP
