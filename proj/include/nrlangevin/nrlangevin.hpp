#pragma once

// Nonreversible Langevin samplers: Lie-Trotter composition of pi-invariant
// reversible kernels with deterministic divergence-free flows, plus the exact
// linear-Gaussian analysis toolkit and chain diagnostics.

#include "nrlangevin/targets.hpp"
#include "nrlangevin/flows.hpp"
#include "nrlangevin/ode.hpp"
#include "nrlangevin/kernels.hpp"
#include "nrlangevin/splitting.hpp"
#include "nrlangevin/gaussian_analysis.hpp"
#include "nrlangevin/diagnostics.hpp"
#include "nrlangevin/data.hpp"
