#include "doctest.h"

#include "rcbf/rng.hpp"
