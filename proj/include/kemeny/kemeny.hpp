#pragma once

#include "kemeny/dynamic.hpp"
#include "kemeny/error.hpp"
#include "kemeny/exact.hpp"
#include "kemeny/fenwick.hpp"
#include "kemeny/generators.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/index_io.hpp"
#include "kemeny/parallel.hpp"
#include "kemeny/resistance.hpp"
#include "kemeny/rng.hpp"
#include "kemeny/rooted_tree.hpp"
#include "kemeny/spanning.hpp"
#include "kemeny/ttf.hpp"
#include "kemeny/updates.hpp"
