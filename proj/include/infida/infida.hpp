#pragma once

#include "baselines.hpp"
#include "catalog.hpp"
#include "checks.hpp"
#include "config.hpp"
#include "depround.hpp"
#include "error.hpp"
#include "evaluate.hpp"
#include "instance.hpp"
#include "metrics.hpp"
#include "mirror.hpp"
#include "oracle.hpp"
#include "policy.hpp"
#include "random_instance.hpp"
#include "serving.hpp"
#include "simulation.hpp"
#include "subgradient.hpp"
#include "topology.hpp"
#include "trace.hpp"
#include "workload.hpp"
