#pragma once

#include "distclinr/arch.hpp"
#include "distclinr/bounds.hpp"
#include "distclinr/circuit.hpp"
#include "distclinr/clinr.hpp"
#include "distclinr/engine.hpp"
#include "distclinr/gate.hpp"
#include "distclinr/harness.hpp"
#include "distclinr/noise.hpp"
#include "distclinr/pauli.hpp"
#include "distclinr/rng.hpp"
#include "distclinr/synthetic.hpp"
#include "distclinr/tableau.hpp"
