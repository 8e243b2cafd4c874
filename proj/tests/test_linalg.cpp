#include "doctest.h"

#include "rcbf/linalg.hpp"
