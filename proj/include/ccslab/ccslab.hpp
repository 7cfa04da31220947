#pragma once

#include "ccslab/types.hpp"
#include "ccslab/family.hpp"
#include "ccslab/geometry.hpp"
#include "ccslab/fock.hpp"
#include "ccslab/models.hpp"
#include "ccslab/ode.hpp"
#include "ccslab/trajectory.hpp"
#include "ccslab/propagator.hpp"
#include "ccslab/sampler.hpp"
#include "ccslab/exact.hpp"
#include "ccslab/config.hpp"
#include "ccslab/runner.hpp"
