#ifndef CRW_CRW_HPP
#define CRW_CRW_HPP

#include "crw/error.hpp"
#include "crw/matrix.hpp"
#include "crw/rng.hpp"
#include "crw/lp.hpp"
#include "crw/model.hpp"
#include "crw/expression.hpp"
#include "crw/fields.hpp"
#include "crw/policy.hpp"
#include "crw/sim.hpp"
#include "crw/analysis.hpp"
#include "crw/io.hpp"
#include "crw/harness.hpp"

#endif  // CRW_CRW_HPP
