#ifndef LAMDD_SCENARIO_HPP
#define LAMDD_SCENARIO_HPP

#include "lamdd/cohesive.hpp"
#include "lamdd/config.hpp"
#include "lamdd/material.hpp"

#include <map>
#include <optional>

namespace lamdd {

enum class GeometryKind { dcb2d, strip2d, notched_plate2d };
enum class SolveMode { fixed_increment, controlled, arclength_fixed, arclength_controlled };
enum class InterfaceAssign { cohesive, contact, perfect };
enum class BcKind { dirichlet, neumann, free_boundary };

struct LoadPoint {
    double t = 0.0;
    double a = 0.0;
};

/// Piecewise-linear load function of time. Segment boundaries are the
/// direction changes of the amplitude; a time step never crosses one.
struct LoadProgram {
    std::vector<LoadPoint> points;
    std::vector<double> declared_segment_ends; // optional, from the config

    double end_time() const { return points.empty() ? 0.0 : points.back().t; }

    double amplitude(double t) const
    {
        if (points.empty()) return 0.0;
        if (t <= points.front().t) return points.front().a;
        if (t >= points.back().t) return points.back().a;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (t <= points[i].t) {
                const auto& p0 = points[i - 1];
                const auto& p1 = points[i];
                const double w = (t - p0.t) / (p1.t - p0.t);
                return (1.0 - w) * p0.a + w * p1.a;
            }
        }
        return points.back().a;
    }

    /// Next time strictly greater than t at which the load direction may
    /// change (monotone-run boundary), or the program end.
    double next_break(double t) const
    {
        const double eps = 1e-12 * std::max(1.0, std::abs(end_time()));
        double prev_slope = 0.0;
        bool have_slope = false;
        for (std::size_t i = 1; i < points.size(); ++i) {
            const double slope = points[i].a - points[i - 1].a;
            const double s = slope > 0.0 ? 1.0 : (slope < 0.0 ? -1.0 : 0.0);
            if (have_slope && s != prev_slope && points[i - 1].t > t + eps)
                return points[i - 1].t;
            if (s != 0.0) {
                prev_slope = s;
                have_slope = true;
            }
        }
        return end_time();
    }

    void validate() const
    {
        if (points.size() < 2)
            throw config_error("load program: at least two (time, amplitude) points required");
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i].t > points[i - 1].t))
                throw config_error("load program: times must be strictly increasing (invariant violated at point " +
                                   std::to_string(i + 1) + ")");
        // Monotonicity within each declared segment.
        if (!declared_segment_ends.empty()) {
            double seg_start = points.front().t;
            for (double seg_end : declared_segment_ends) {
                int dir = 0;
                for (std::size_t i = 1; i < points.size(); ++i) {
                    if (points[i - 1].t < seg_start || points[i].t > seg_end) continue;
                    const double slope = points[i].a - points[i - 1].a;
                    const int s = slope > 0.0 ? 1 : (slope < 0.0 ? -1 : 0);
                    if (s == 0) continue;
                    if (dir != 0 && s != dir)
                        throw config_error("load program: amplitude not monotonic inside declared segment ending at t = " +
                                           std::to_string(seg_end));
                    dir = s;
                }
                seg_start = seg_end;
            }
        }
    }
};

struct BoundaryCondition {
    std::string part;
    BcKind kind = BcKind::free_boundary;
    Vec2 unit_value = Vec2::Zero(); // value at amplitude 1
};

struct PlyDef {
    double thickness = 0.0;
    PlyMaterial material;
    double angle_deg = 0.0;
};

struct SolverParams {
    SolveMode mode = SolveMode::controlled;
    double k_plus = 0.0;  // 0 = auto (max of cohesive stiffnesses)
    double k_minus = 0.0; // 0 = auto
    double nu_iter_target = 1e-3;
    double nu_time_target = 5e-2;
    int ns = 10;
    int max_latin_iters = 3000;
    int max_controller_iters = 6;
    int local_max_iters = 50;
    double local_tol = 1e-12;
    double relaxation = 0.8;
    bool macro_enabled = true;
    bool macro_moments = false;
    double band_lo = 0.5;
    double dt_initial = 0.0; // 0 = (end_time)/20
    double dt_min = 0.0;     // 0 = dt_initial/1000
    double dt_max = 0.0;     // 0 = end_time
    double dl = 0.0;         // arc-length value / initial (arclength modes)
    double dl_min = 0.0;
    double dl_max = 0.0;
    double frozen_nu_target = 0.0; // 0 = nu_iter_target / 10
    double arc_control_tol = 1e-8;
    int max_newton_iters = 60;
    int threads = 1;
    bool trace_csv = false;
};

struct Scenario {
    std::string units;
    GeometryKind geometry = GeometryKind::strip2d;
    double length = 0.0;
    std::vector<PlyDef> plies;
    int elements_x = 0;
    int elements_y = 0; // per ply
    int substructures_x = 1;
    double crack_fraction = 0.0;  // dcb2d
    int notch_plies = 0;          // notched_plate2d
    double notch_fraction = 0.5;  // notched_plate2d

    CohesiveMaterial cohesive;
    InterfaceAssign pair_default = InterfaceAssign::cohesive;
    std::map<int, InterfaceAssign> pair_overrides; // 1-based ply-pair index

    LoadProgram program;
    double pull = 1.0;
    std::vector<BoundaryCondition> bcs; // geometry defaults unless overridden
    std::string reaction_part;

    SolverParams solver;

    int num_plies() const { return static_cast<int>(plies.size()); }
    int num_pair_interfaces() const { return num_plies() - 1; }

    InterfaceAssign pair_kind(int pair_index) const
    {
        auto it = pair_overrides.find(pair_index);
        return it == pair_overrides.end() ? pair_default : it->second;
    }

    double total_thickness() const
    {
        double h = 0.0;
        for (const auto& p : plies) h += p.thickness;
        return h;
    }

    double k_search() const
    {
        const double k = std::max(cohesive.kn0, cohesive.kt0);
        return k;
    }

    double effective_k_plus() const { return solver.k_plus > 0.0 ? solver.k_plus : k_search(); }
    double effective_k_minus() const { return solver.k_minus > 0.0 ? solver.k_minus : k_search(); }
};

namespace detail {

inline GeometryKind parse_geometry(const std::string& s)
{
    if (s == "dcb2d") return GeometryKind::dcb2d;
    if (s == "strip2d") return GeometryKind::strip2d;
    if (s == "notched_plate2d") return GeometryKind::notched_plate2d;
    throw config_error("unknown geometry kind '" + s + "'");
}

inline SolveMode parse_mode(const std::string& s)
{
    if (s == "fixed_increment") return SolveMode::fixed_increment;
    if (s == "controlled") return SolveMode::controlled;
    if (s == "arclength_fixed") return SolveMode::arclength_fixed;
    if (s == "arclength_controlled") return SolveMode::arclength_controlled;
    throw config_error("unknown solver mode '" + s + "'");
}

inline InterfaceAssign parse_assign(const std::string& s)
{
    if (s == "cohesive") return InterfaceAssign::cohesive;
    if (s == "contact") return InterfaceAssign::contact;
    if (s == "perfect") return InterfaceAssign::perfect;
    throw config_error("unknown interface kind '" + s + "'");
}

inline std::vector<std::string> tokens(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double tok_num(const std::string& t, const std::string& what)
{
    try {
        std::size_t idx = 0;
        double d = std::stod(t, &idx);
        if (idx == t.size()) return d;
    } catch (const std::exception&) {
    }
    throw config_error(what + ": expected number, got '" + t + "'");
}

inline PlyMaterial parse_ply_material(const std::string& value, double* angle_out)
{
    auto tk = tokens(value);
    if (tk.empty()) throw config_error("ply material: empty value");
    if (tk[0] == "isotropic") {
        if (tk.size() != 3) throw config_error("ply material: isotropic needs 'isotropic E nu'");
        if (angle_out) *angle_out = 0.0;
        return PlyMaterial::isotropic(tok_num(tk[1], "E"), tok_num(tk[2], "nu"));
    }
    if (tk[0] == "orthotropic") {
        if (tk.size() != 5 && tk.size() != 6)
            throw config_error("ply material: orthotropic needs 'orthotropic E1 E2 nu12 G12 [angle]'");
        const double angle = tk.size() == 6 ? tok_num(tk[5], "angle") : 0.0;
        if (angle_out) *angle_out = angle;
        return PlyMaterial::orthotropic(tok_num(tk[1], "E1"), tok_num(tk[2], "E2"),
                                        tok_num(tk[3], "nu12"), tok_num(tk[4], "G12"), angle);
    }
    throw config_error("ply material: expected 'isotropic' or 'orthotropic', got '" + tk[0] + "'");
}

inline std::vector<BoundaryCondition> default_bcs(GeometryKind g, double pull)
{
    std::vector<BoundaryCondition> bcs;
    switch (g) {
    case GeometryKind::dcb2d:
        bcs.push_back({"arm_top", BcKind::dirichlet, Vec2(0.0, pull)});
        bcs.push_back({"arm_bottom", BcKind::dirichlet, Vec2(0.0, -pull)});
        bcs.push_back({"end", BcKind::free_boundary, Vec2::Zero()});
        break;
    case GeometryKind::strip2d:
        bcs.push_back({"bottom", BcKind::dirichlet, Vec2::Zero()});
        bcs.push_back({"top", BcKind::dirichlet, Vec2(0.0, pull)});
        break;
    case GeometryKind::notched_plate2d:
        bcs.push_back({"left", BcKind::dirichlet, Vec2::Zero()});
        bcs.push_back({"right", BcKind::dirichlet, Vec2(pull, 0.0)});
        break;
    }
    return bcs;
}

inline std::string default_reaction_part(GeometryKind g)
{
    switch (g) {
    case GeometryKind::dcb2d: return "arm_top";
    case GeometryKind::strip2d: return "top";
    case GeometryKind::notched_plate2d: return "right";
    }
    return "";
}

} // namespace detail

/// Parses and validates a scenario file. Throws config_error with the
/// offending line/field on parse errors and with the violated invariant
/// on validation errors.
inline Scenario load_scenario(const std::string& config_text)
{
    const ConfigDoc doc = ConfigDoc::parse(config_text);
    Scenario sc;

    sc.units = doc.get_string("", "units", "");
    if (sc.units.empty())
        throw config_error("missing 'units' header (e.g. units = N,mm,MPa)");

    // [geometry]
    sc.geometry = detail::parse_geometry(doc.get_string("geometry", "kind"));
    sc.length = doc.get_double("geometry", "length");
    if (sc.length <= 0.0) throw config_error("geometry.length must be > 0");
    const int num_plies = doc.get_int("geometry", "num_plies");
    if (num_plies < 2) throw config_error("geometry.num_plies must be >= 2");
    sc.elements_x = doc.get_int("geometry", "elements_x");
    sc.elements_y = doc.get_int("geometry", "elements_y");
    if (sc.elements_x < 1 || sc.elements_y < 1)
        throw config_error("geometry.elements_x / elements_y must be positive integers");
    sc.substructures_x = doc.get_int("geometry", "substructures_x", 1);
    if (sc.substructures_x < 1) throw config_error("geometry.substructures_x must be >= 1");
    sc.crack_fraction = doc.get_double("geometry", "crack_fraction", 0.0);
    if (sc.crack_fraction < 0.0 || sc.crack_fraction >= 1.0)
        throw config_error("geometry.crack_fraction must be in [0, 1)");
    sc.notch_plies = doc.get_int("geometry", "notch_plies", 0);
    if (sc.notch_plies < 0 || sc.notch_plies >= num_plies)
        throw config_error("geometry.notch_plies must be in [0, num_plies)");
    sc.notch_fraction = doc.get_double("geometry", "notch_fraction", 0.5);
    if (sc.notch_fraction <= 0.0 || sc.notch_fraction >= 1.0)
        throw config_error("geometry.notch_fraction must be in (0, 1)");

    // Ply thicknesses.
    std::vector<double> th;
    {
        const std::string tv = doc.get_string("geometry", "ply_thickness");
        for (const auto& tok : ConfigDoc::split(tv, ','))
            th.push_back(detail::tok_num(ConfigDoc::trim(tok), "ply_thickness"));
        if (th.size() == 1) th.assign(static_cast<std::size_t>(num_plies), th[0]);
        if (static_cast<int>(th.size()) != num_plies)
            throw config_error("geometry.ply_thickness: need 1 or num_plies values");
        for (double t : th)
            if (t <= 0.0) throw config_error("ply thickness must be strictly positive");
    }

    // [plies]
    sc.plies.resize(static_cast<std::size_t>(num_plies));
    for (int p = 0; p < num_plies; ++p) sc.plies[static_cast<std::size_t>(p)].thickness = th[static_cast<std::size_t>(p)];
    {
        bool any = false;
        if (auto all = doc.find("plies", "all")) {
            double angle = 0.0;
            PlyMaterial m = detail::parse_ply_material(*all, &angle);
            for (auto& p : sc.plies) {
                p.material = m;
                p.angle_deg = angle;
            }
            any = true;
        }
        for (int p = 1; p <= num_plies; ++p) {
            if (auto v = doc.find("plies", "ply" + std::to_string(p))) {
                double angle = 0.0;
                sc.plies[static_cast<std::size_t>(p - 1)].material = detail::parse_ply_material(*v, &angle);
                sc.plies[static_cast<std::size_t>(p - 1)].angle_deg = angle;
                any = true;
            }
        }
        if (!any) throw config_error("[plies]: provide 'all = ...' or per-ply 'plyK = ...' entries");
        for (const auto& p : sc.plies)
            if (!p.material.positive_definite())
                throw config_error("[plies]: elasticity tensor not positive definite");
    }

    // [cohesive]
    {
        const double hmin = *std::min_element(th.begin(), th.end());
        const double t_int = hmin / 10.0; // interface "thickness" for the default stiffness
        const std::string kn_s = doc.get_string("cohesive", "kn0", "auto");
        const std::string kt_s = doc.get_string("cohesive", "kt0", "auto");
        if (kn_s == "auto") {
            const double Em = doc.get_double("cohesive", "matrix_E");
            sc.cohesive.kn0 = Em / t_int;
        } else {
            sc.cohesive.kn0 = detail::tok_num(kn_s, "cohesive.kn0");
        }
        if (kt_s == "auto") {
            const double Gm = doc.get_double("cohesive", "matrix_G");
            sc.cohesive.kt0 = Gm / t_int;
        } else {
            sc.cohesive.kt0 = detail::tok_num(kt_s, "cohesive.kt0");
        }
        sc.cohesive.Yc = doc.get_double("cohesive", "Yc");
        sc.cohesive.n = doc.get_double("cohesive", "n", 0.5);
        sc.cohesive.alpha = doc.get_double("cohesive", "alpha", 1.0);
        sc.cohesive.gamma1 = doc.get_double("cohesive", "gamma1", 1.0);
        sc.cohesive.gamma2 = doc.get_double("cohesive", "gamma2", 1.0);
        sc.cohesive.validate();
    }

    // [interfaces]
    sc.pair_default = detail::parse_assign(doc.get_string("interfaces", "default", "cohesive"));
    for (int p = 1; p < num_plies; ++p) {
        if (auto v = doc.find("interfaces", "pair" + std::to_string(p)))
            sc.pair_overrides[p] = detail::parse_assign(*v);
    }

    // [load]
    {
        const std::string prog = doc.get_string("load", "program");
        for (const auto& tok : ConfigDoc::split(prog, ',')) {
            auto tv = ConfigDoc::split(ConfigDoc::trim(tok), ':');
            if (tv.size() != 2)
                throw config_error("load.program: expected 'time:amplitude' pairs separated by commas");
            LoadPoint p;
            p.t = detail::tok_num(ConfigDoc::trim(tv[0]), "load.program time");
            p.a = detail::tok_num(ConfigDoc::trim(tv[1]), "load.program amplitude");
            sc.program.points.push_back(p);
        }
        if (doc.has("load", "segments"))
            sc.program.declared_segment_ends = doc.get_double_list("load", "segments");
        sc.program.validate();
        sc.pull = doc.get_double("load", "pull", 1.0);

        sc.bcs = detail::default_bcs(sc.geometry, sc.pull);
        for (auto& bc : sc.bcs) {
            if (auto v = doc.find("load", bc.part)) {
                auto tk = detail::tokens(*v);
                if (tk.empty()) throw config_error("load." + bc.part + ": empty value");
                if (tk[0] == "free") {
                    bc.kind = BcKind::free_boundary;
                } else if (tk[0] == "dirichlet" || tk[0] == "neumann") {
                    if (tk.size() != 3)
                        throw config_error("load." + bc.part + ": expected '" + tk[0] + " vx vy'");
                    bc.kind = tk[0] == "dirichlet" ? BcKind::dirichlet : BcKind::neumann;
                    bc.unit_value = Vec2(detail::tok_num(tk[1], bc.part), detail::tok_num(tk[2], bc.part));
                } else {
                    throw config_error("load." + bc.part + ": expected dirichlet/neumann/free");
                }
            }
        }
        sc.reaction_part = doc.get_string("load", "reaction_part", detail::default_reaction_part(sc.geometry));
    }

    // [solver]
    {
        sc.solver.mode = detail::parse_mode(doc.get_string("solver", "mode", "controlled"));
        sc.solver.k_plus = doc.get_double("solver", "k_plus", 0.0);
        sc.solver.k_minus = doc.get_double("solver", "k_minus", 0.0);
        sc.solver.nu_iter_target = doc.get_double("solver", "nu_iter_target", 1e-3);
        sc.solver.nu_time_target = doc.get_double("solver", "nu_time_target", 5e-2);
        sc.solver.ns = doc.get_int("solver", "ns", 10);
        if (sc.solver.ns < 2) throw config_error("solver.ns must be >= 2");
        sc.solver.max_latin_iters = doc.get_int("solver", "max_latin_iters", 3000);
        sc.solver.max_controller_iters = doc.get_int("solver", "max_controller_iters", 6);
        sc.solver.local_max_iters = doc.get_int("solver", "local_max_iters", 50);
        sc.solver.local_tol = doc.get_double("solver", "local_tol", 1e-12);
        sc.solver.relaxation = doc.get_double("solver", "relaxation", 0.8);
        sc.solver.macro_enabled = doc.get_bool("solver", "macro", true);
        sc.solver.macro_moments = doc.get_bool("solver", "macro_moments", false);
        sc.solver.band_lo = doc.get_double("solver", "band_lo", 0.5);
        const double T = sc.program.end_time();
        sc.solver.dt_initial = doc.get_double("solver", "dt_initial", T / 20.0);
        sc.solver.dt_min = doc.get_double("solver", "dt_min", sc.solver.dt_initial / 1000.0);
        sc.solver.dt_max = doc.get_double("solver", "dt_max", T);
        sc.solver.dl = doc.get_double("solver", "dl", 0.0);
        sc.solver.dl_min = doc.get_double("solver", "dl_min", sc.solver.dl / 1000.0);
        sc.solver.dl_max = doc.get_double("solver", "dl_max", sc.solver.dl * 20.0);
        sc.solver.frozen_nu_target = doc.get_double("solver", "frozen_nu_target", 0.0);
        sc.solver.arc_control_tol = doc.get_double("solver", "arc_control_tol", 1e-8);
        sc.solver.max_newton_iters = doc.get_int("solver", "max_newton_iters", 60);
        sc.solver.threads = doc.get_int("solver", "threads", 1);
        sc.solver.trace_csv = doc.get_bool("solver", "trace_csv", false);
        if ((sc.solver.mode == SolveMode::arclength_fixed ||
             sc.solver.mode == SolveMode::arclength_controlled) && sc.solver.dl <= 0.0)
            throw config_error("solver.dl must be > 0 in arc-length modes");
        if (sc.solver.k_plus < 0.0 || sc.solver.k_minus < 0.0)
            throw config_error("solver.k_plus / k_minus must be positive (or omitted for auto)");
    }

    return sc;
}

} // namespace lamdd

#endif // LAMDD_SCENARIO_HPP
