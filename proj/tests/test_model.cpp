#include "doctest.h"

#include "rcbf/model.hpp"
