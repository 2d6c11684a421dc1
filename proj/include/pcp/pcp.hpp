#pragma once

// Umbrella header for the library (the CLI lives in pcp/cli.hpp).

#include "pcp/core.hpp"
#include "pcp/rng.hpp"
#include "pcp/svd.hpp"
#include "pcp/norms.hpp"
#include "pcp/io.hpp"
#include "pcp/prox.hpp"
#include "pcp/solver.hpp"
#include "pcp/synth.hpp"
#include "pcp/certify.hpp"
#include "pcp/harness.hpp"
#include "pcp/report.hpp"
