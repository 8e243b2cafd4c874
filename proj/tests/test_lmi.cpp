#include "doctest.h"

#include "rcbf/lmi.hpp"
