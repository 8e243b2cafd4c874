#include "doctest.h"

#include "rcbf/channel.hpp"
