#pragma once

#include "pggibbs/cli.hpp"
#include "pggibbs/csv.hpp"
#include "pggibbs/drift.hpp"
#include "pggibbs/errors.hpp"
#include "pggibbs/gibbs.hpp"
#include "pggibbs/math_util.hpp"
#include "pggibbs/mcse.hpp"
#include "pggibbs/model.hpp"
#include "pggibbs/polya_gamma.hpp"
#include "pggibbs/propriety.hpp"
#include "pggibbs/quadrature.hpp"
#include "pggibbs/rng.hpp"
#include "pggibbs/simplex.hpp"
