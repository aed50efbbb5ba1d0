#pragma once

#include "solvgeo/cache.hpp"
#include "solvgeo/checks.hpp"
#include "solvgeo/csv.hpp"
#include "solvgeo/distance.hpp"
#include "solvgeo/entropy.hpp"
#include "solvgeo/geodesics.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/jacobi.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/ode.hpp"
#include "solvgeo/quadrature.hpp"
#include "solvgeo/sampling.hpp"
#include "solvgeo/serialize.hpp"
#include "solvgeo/version.hpp"
#include "solvgeo/volume.hpp"
#include "solvgeo/verify.hpp"
