#pragma once

#include "ptsat/eigenfunctions.hpp"
#include "ptsat/errors.hpp"
#include "ptsat/models.hpp"
#include "ptsat/oracle.hpp"
#include "ptsat/rootfinder.hpp"
#include "ptsat/specfun.hpp"
#include "ptsat/version.hpp"
