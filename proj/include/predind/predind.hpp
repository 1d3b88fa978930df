#pragma once

#include "predind/data_model.hpp"
#include "predind/error.hpp"
#include "predind/ingest.hpp"
#include "predind/metrics.hpp"
#include "predind/query.hpp"
#include "predind/regression.hpp"
#include "predind/rpi.hpp"
#include "predind/selection.hpp"
#include "predind/svg.hpp"
#include "predind/wire.hpp"
