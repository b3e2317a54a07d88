#pragma once

#include "cornerflow/config.hpp"
#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/export.hpp"
#include "cornerflow/goursat.hpp"
#include "cornerflow/monitor.hpp"
#include "cornerflow/node.hpp"
#include "cornerflow/numerics.hpp"
#include "cornerflow/pipeline.hpp"
#include "cornerflow/validation.hpp"
#include "cornerflow/waves.hpp"
