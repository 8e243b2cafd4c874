#include "doctest.h"

#include "rcbf/experiments.hpp"
