// nlhom.hpp -- umbrella header.

#ifndef NLHOM_NLHOM_HPP
#define NLHOM_NLHOM_HPP

#include "nlhom/grid.hpp"
#include "nlhom/fft.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/medium.hpp"
#include "nlhom/field_io.hpp"
#include "nlhom/operator.hpp"
#include "nlhom/solver.hpp"
#include "nlhom/resolvent.hpp"
#include "nlhom/corrector.hpp"
#include "nlhom/effective.hpp"
#include "nlhom/dense_oracle.hpp"
#include "nlhom/experiments.hpp"
#include "nlhom/persist.hpp"

#endif
