#pragma once

#include "certificates.hpp"
#include "domain_g.hpp"
#include "escape.hpp"
#include "integrator.hpp"
#include "io.hpp"
#include "model.hpp"
#include "montecarlo.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "random.hpp"
#include "truncation.hpp"
