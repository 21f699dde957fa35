// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdrlpa/baselines.hpp"
#include "hdrlpa/calibration.hpp"
#include "hdrlpa/calpa.hpp"
#include "hdrlpa/errors.hpp"
#include "hdrlpa/geometry.hpp"
#include "hdrlpa/image.hpp"
#include "hdrlpa/lpa.hpp"
#include "hdrlpa/metrics.hpp"
#include "hdrlpa/netpbm.hpp"
#include "hdrlpa/parallel.hpp"
#include "hdrlpa/radiometry.hpp"
#include "hdrlpa/random.hpp"
#include "hdrlpa/rig_config.hpp"
#include "hdrlpa/simulator.hpp"
