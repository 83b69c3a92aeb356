#pragma once

#include "raylift/camera.hpp"
#include "raylift/error.hpp"
#include "raylift/farm.hpp"
#include "raylift/features.hpp"
#include "raylift/fit.hpp"
#include "raylift/metrics.hpp"
#include "raylift/optim.hpp"
#include "raylift/rotation.hpp"
#include "raylift/solver.hpp"
#include "raylift/synth.hpp"
#include "raylift/temporal.hpp"
