#pragma once

#include "heavycoin/analysis.hpp"
#include "heavycoin/engine.hpp"
#include "heavycoin/grade.hpp"
#include "heavycoin/indexed_max_heap.hpp"
#include "heavycoin/model.hpp"
#include "heavycoin/random.hpp"
#include "heavycoin/strategy.hpp"
