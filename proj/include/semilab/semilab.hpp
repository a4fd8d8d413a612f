#pragma once

#include "semilab/core.hpp"
#include "semilab/linop.hpp"
#include "semilab/semigroup.hpp"
#include "semilab/grid.hpp"
#include "semilab/forcing.hpp"
#include "semilab/solver.hpp"
#include "semilab/cauchy.hpp"
#include "semilab/theorem.hpp"
#include "semilab/weighted.hpp"
#include "semilab/io.hpp"
