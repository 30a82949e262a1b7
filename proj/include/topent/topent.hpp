#pragma once

#include "topent/capacity.hpp"
#include "topent/caratheodory.hpp"
#include "topent/errors.hpp"
#include "topent/estimate.hpp"
#include "topent/finite_system.hpp"
#include "topent/io.hpp"
#include "topent/json_codec.hpp"
#include "topent/sft.hpp"
#include "topent/solvers.hpp"
#include "topent/verify.hpp"
