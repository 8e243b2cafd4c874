#include "doctest.h"

#include "rcbf/problems.hpp"
