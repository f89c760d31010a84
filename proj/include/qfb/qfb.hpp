#pragma once

#include "numeric.hpp"
#include "qcore.hpp"
#include "qbessel.hpp"
#include "zeros.hpp"
#include "qpoly.hpp"
#include "series.hpp"
#include "expansions.hpp"
#include "io.hpp"
