#pragma once

#include "poincare/numeric.hpp"
#include "poincare/weights.hpp"
#include "poincare/grid.hpp"
#include "poincare/forms.hpp"
#include "poincare/inequalities.hpp"
#include "poincare/sharp.hpp"
#include "poincare/suite.hpp"
#include "poincare/report.hpp"
#include "poincare/config.hpp"
#include "poincare/experiments.hpp"
