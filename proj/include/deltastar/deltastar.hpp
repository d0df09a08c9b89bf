#pragma once

#include "deltastar/error.hpp"
#include "deltastar/quadrature.hpp"
#include "deltastar/geometry.hpp"
#include "deltastar/kernels.hpp"
#include "deltastar/discretization.hpp"
#include "deltastar/rootfind.hpp"
#include "deltastar/spectral.hpp"
#include "deltastar/bounds.hpp"
#include "deltastar/optimizer.hpp"
