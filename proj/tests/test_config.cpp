#include "doctest.h"

#include "rcbf/config.hpp"
