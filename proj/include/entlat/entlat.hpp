#pragma once

#include "entlat/analysis.hpp"
#include "entlat/config.hpp"
#include "entlat/ensemble.hpp"
#include "entlat/errors.hpp"
#include "entlat/hamiltonian.hpp"
#include "entlat/hilbert.hpp"
#include "entlat/io.hpp"
#include "entlat/lattice.hpp"
#include "entlat/observables.hpp"
#include "entlat/propagator.hpp"
#include "entlat/rng.hpp"
#include "entlat/runner.hpp"
#include "entlat/selftest.hpp"
#include "entlat/version.hpp"
