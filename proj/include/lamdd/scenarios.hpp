#ifndef LAMDD_SCENARIOS_HPP
#define LAMDD_SCENARIOS_HPP

#include "lamdd/analysis.hpp"
#include "lamdd/strip_oracle.hpp"

namespace lamdd {

/// Built-in validation scenarios. The cohesive constants are desk-scale
/// choices sized so the process zone spans several Gauss columns; they are
/// not measured material data.
inline std::string builtin_scenario_text(const std::string& name)
{
    if (name == "dcb") {
        return R"(# stable double cantilever beam, displacement controlled
units = N,mm,MPa

[geometry]
kind = dcb2d
length = 12
num_plies = 4
ply_thickness = 0.6
elements_x = 36
elements_y = 2
substructures_x = 2
crack_fraction = 0.3

[plies]
all = isotropic 1.0e5 0.0

[cohesive]
kn0 = 1.0e4
kt0 = 5.0e3
Yc = 0.02
n = 0.5
alpha = 1
gamma1 = 1
gamma2 = 1

[interfaces]
default = cohesive

[load]
program = 0:0, 1:1
pull = 0.055

[solver]
mode = controlled
k_plus = 3.0e4
k_minus = 3.0e4
nu_iter_target = 1e-3
nu_time_target = 5e-2
ns = 10
dt_initial = 0.05
dt_min = 1e-5
dt_max = 0.25
max_latin_iters = 12000
relaxation = 0.5
macro = on
)";
    }
    if (name == "strip") {
        return R"(# uniform strip with one cohesive interface; snap-back exerciser
units = N,mm,MPa

[geometry]
kind = strip2d
length = 2
num_plies = 2
ply_thickness = 5
elements_x = 2
elements_y = 2
substructures_x = 1

[plies]
all = isotropic 1.0e4 0.0

[cohesive]
kn0 = 5.0e3
kt0 = 5.0e3
Yc = 0.01
n = 0.5
alpha = 1
gamma1 = 1
gamma2 = 1

[interfaces]
default = cohesive

[load]
program = 0:0, 0.012:1
pull = 0.02

[solver]
mode = arclength_fixed
k_plus = 1.5e4
k_minus = 1.5e4
nu_iter_target = 1e-5
dl = 4e-4
dl_min = 1e-6
dl_max = 1.2e-3
nu_time_target = 5e-2
ns = 10
max_latin_iters = 12000
relaxation = 0.5
macro = on
)";
    }
    if (name == "notched_plate") {
        return R"(# notched multi-orientation plate under tension; unstable delamination
units = N,mm,MPa

[geometry]
kind = notched_plate2d
length = 12
num_plies = 4
ply_thickness = 0.5
elements_x = 30
elements_y = 2
substructures_x = 2
notch_plies = 1
notch_fraction = 0.5

[plies]
ply1 = orthotropic 1.4e5 7.0e3 0.3 5.0e3 90
ply2 = orthotropic 1.4e5 7.0e3 0.3 5.0e3 -45
ply3 = orthotropic 1.4e5 7.0e3 0.3 5.0e3 45
ply4 = orthotropic 1.4e5 7.0e3 0.3 5.0e3 0

[cohesive]
kn0 = 2.0e4
kt0 = 1.0e4
Yc = 0.02
n = 0.5
alpha = 1
gamma1 = 1
gamma2 = 1

[interfaces]
default = cohesive

[load]
program = 0:0, 0.042:1
pull = 0.03

[solver]
mode = arclength_fixed
nu_iter_target = 1e-3
dl = 1.5e-3
dl_min = 1e-6
dl_max = 5e-3
arc_control_tol = 1e-6
nu_time_target = 2e-2
ns = 10
max_latin_iters = 12000
relaxation = 0.5
macro = on
)";
    }
    throw config_error("unknown built-in scenario '" + name + "'");
}

inline Scenario builtin_scenario(const std::string& name)
{
    return load_scenario(builtin_scenario_text(name));
}

/// Oracle matching the strip scenario parameters.
inline OracleStripSolution strip_oracle(const Scenario& sc)
{
    OracleStripSolution o;
    o.mat = sc.cohesive;
    o.E = sc.plies.front().material.D(1, 1); // uniaxial with nu = 0
    o.H = sc.total_thickness();
    o.width = sc.length;
    return o;
}

inline RunResult run_dcb(const Scenario& sc)
{
    if (sc.geometry != GeometryKind::dcb2d) throw config_error("run_dcb: geometry is not dcb2d");
    return run_analysis(build_model(sc));
}

inline RunResult run_strip(const Scenario& sc)
{
    if (sc.geometry != GeometryKind::strip2d) throw config_error("run_strip: geometry is not strip2d");
    return run_analysis(build_model(sc));
}

inline RunResult run_notched_plate(const Scenario& sc)
{
    if (sc.geometry != GeometryKind::notched_plate2d)
        throw config_error("run_notched_plate: geometry is not notched_plate2d");
    return run_analysis(build_model(sc));
}

} // namespace lamdd

#endif // LAMDD_SCENARIOS_HPP
