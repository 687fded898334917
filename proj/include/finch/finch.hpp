#pragma once

#include "finch/bench.hpp"
#include "finch/corpus.hpp"
#include "finch/decompose.hpp"
#include "finch/eval.hpp"
#include "finch/execution.hpp"
#include "finch/metrics.hpp"
#include "finch/report.hpp"
