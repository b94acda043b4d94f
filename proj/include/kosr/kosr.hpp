#pragma once

#include "kosr/bench.hpp"
#include "kosr/category_index.hpp"
#include "kosr/dijkstra.hpp"
#include "kosr/engines.hpp"
#include "kosr/graph.hpp"
#include "kosr/hop_labeling.hpp"
#include "kosr/index_store.hpp"
#include "kosr/oracle.hpp"
