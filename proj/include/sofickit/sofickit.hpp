#pragma once

#include "sofickit/combinators.hpp"
#include "sofickit/embed.hpp"
#include "sofickit/errors.hpp"
#include "sofickit/json_io.hpp"
#include "sofickit/oracle.hpp"
#include "sofickit/pbij.hpp"
#include "sofickit/rational.hpp"
#include "sofickit/relation.hpp"
#include "sofickit/rng.hpp"
#include "sofickit/sampling.hpp"
#include "sofickit/space.hpp"
