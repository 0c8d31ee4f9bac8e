#pragma once

#include "bsdyn/gl2z.hpp"
#include "bsdyn/circle.hpp"
#include "bsdyn/torus.hpp"
#include "bsdyn/bsgroup.hpp"
#include "bsdyn/catalog.hpp"
#include "bsdyn/estimators.hpp"
#include "bsdyn/experiments.hpp"
#include "bsdyn/io.hpp"
#include "bsdyn/acceptance.hpp"
