#pragma once

#include "analysis.hpp"
#include "dynamics.hpp"
#include "fock_basis.hpp"
#include "interferometry.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "metrology.hpp"
#include "rng.hpp"
#include "su4_algebra.hpp"
#include "sweep.hpp"
