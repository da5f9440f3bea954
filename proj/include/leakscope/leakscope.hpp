#pragma once

#include "leakscope/errors.hpp"
#include "leakscope/roots.hpp"
#include "leakscope/headloss.hpp"
#include "leakscope/hydraulics.hpp"
#include "leakscope/localization.hpp"
#include "leakscope/sensitivity.hpp"
#include "leakscope/isolation.hpp"
