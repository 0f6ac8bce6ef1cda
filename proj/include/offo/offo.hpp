#pragma once

#include "offo/types.hpp"
#include "offo/oracle.hpp"
#include "offo/registry.hpp"
#include "offo/criticality.hpp"
#include "offo/weights.hpp"
#include "offo/curvature.hpp"
#include "offo/step.hpp"
#include "offo/solvers.hpp"
#include "offo/record_io.hpp"
#include "offo/theory.hpp"
#include "offo/bench.hpp"
