#pragma once

#include "core.hpp"
#include "rng.hpp"
#include "hardy.hpp"
#include "grassmann.hpp"
#include "toeplitz.hpp"
#include "evolution.hpp"
#include "stability.hpp"
#include "integrator.hpp"
#include "io.hpp"
#include "experiments.hpp"
