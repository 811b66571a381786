#pragma once

// Umbrella header.

#include "tconn/backlund.hpp"
#include "tconn/container_io.hpp"
#include "tconn/errors.hpp"
#include "tconn/fft.hpp"
#include "tconn/grid.hpp"
#include "tconn/mat2.hpp"
#include "tconn/operators.hpp"
#include "tconn/rng.hpp"
#include "tconn/theta_field.hpp"
#include "tconn/transport.hpp"
#include "tconn/weierstrass.hpp"
