#pragma once

#include "mrep/core.hpp"
#include "mrep/matrix.hpp"
#include "mrep/basis.hpp"
#include "mrep/bezier.hpp"
#include "mrep/parallel.hpp"
#include "mrep/decompose.hpp"
#include "mrep/reduce.hpp"
#include "mrep/distance.hpp"
#include "mrep/project.hpp"
#include "mrep/oracle.hpp"
#include "mrep/random.hpp"
