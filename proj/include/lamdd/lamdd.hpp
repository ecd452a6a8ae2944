#ifndef LAMDD_LAMDD_HPP
#define LAMDD_LAMDD_HPP

// Quasi-static cohesive-interface delamination solver: LaTIn-style domain
// decomposition, local arc-length continuation for unstable phases, and an
// automatic load-increment controller driven by a constitutive-law
// residual evaluated on solutions interpolated over each time step.

#include "lamdd/analysis.hpp"
#include "lamdd/arclength.hpp"
#include "lamdd/cohesive.hpp"
#include "lamdd/config.hpp"
#include "lamdd/fem.hpp"
#include "lamdd/fields.hpp"
#include "lamdd/io.hpp"
#include "lamdd/latin.hpp"
#include "lamdd/local_stage.hpp"
#include "lamdd/macro.hpp"
#include "lamdd/material.hpp"
#include "lamdd/model.hpp"
#include "lamdd/scenario.hpp"
#include "lamdd/scenarios.hpp"
#include "lamdd/strip_oracle.hpp"
#include "lamdd/timestep.hpp"

#endif // LAMDD_LAMDD_HPP
