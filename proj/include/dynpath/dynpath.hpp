#pragma once

#include "dynpath/aalen.hpp"
#include "dynpath/bootstrap.hpp"
#include "dynpath/core.hpp"
#include "dynpath/effects.hpp"
#include "dynpath/io.hpp"
#include "dynpath/linalg.hpp"
#include "dynpath/mediator.hpp"
#include "dynpath/parallel.hpp"
#include "dynpath/rng.hpp"
#include "dynpath/serialize.hpp"
#include "dynpath/simulate.hpp"
