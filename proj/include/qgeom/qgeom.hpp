#pragma once

#include "qgeom/basis.hpp"
#include "qgeom/common.hpp"
#include "qgeom/gaussbonnet.hpp"
#include "qgeom/geometry.hpp"
#include "qgeom/kpoint.hpp"
#include "qgeom/model.hpp"
#include "qgeom/projector.hpp"
#include "qgeom/quadrature.hpp"
#include "qgeom/singular.hpp"
