#pragma once

#include "nlps/benchmarks.hpp"
#include "nlps/config.hpp"
#include "nlps/dataset.hpp"
#include "nlps/diffused.hpp"
#include "nlps/interior.hpp"
#include "nlps/io.hpp"
#include "nlps/metrics.hpp"
#include "nlps/problem.hpp"
#include "nlps/sampler.hpp"
#include "nlps/steps.hpp"
#include "nlps/svg.hpp"
#include "nlps/sweep.hpp"
