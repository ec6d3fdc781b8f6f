#pragma once

#include "core.hpp"
#include "roots.hpp"
#include "search.hpp"
#include "legendre.hpp"
#include "gauge.hpp"
#include "convex.hpp"
#include "monotone.hpp"
#include "representatives.hpp"
#include "probes.hpp"
#include "energy.hpp"
#include "stepper.hpp"
#include "diagnostics.hpp"
#include "models.hpp"
#include "sweep.hpp"
#include "config.hpp"
#include "report.hpp"
