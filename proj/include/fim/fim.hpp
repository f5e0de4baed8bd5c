#pragma once

#include "fim/apriori.hpp"
#include "fim/bench.hpp"
#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/fpgrowth.hpp"
#include "fim/mapreduce.hpp"
#include "fim/oracle.hpp"
#include "fim/parallel.hpp"
#include "fim/types.hpp"
