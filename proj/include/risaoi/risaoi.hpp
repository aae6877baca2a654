#pragma once

#include "risaoi/aoi.hpp"
#include "risaoi/channel.hpp"
#include "risaoi/config.hpp"
#include "risaoi/episode.hpp"
#include "risaoi/experiments.hpp"
#include "risaoi/mec.hpp"
#include "risaoi/policies.hpp"
#include "risaoi/rng.hpp"
#include "risaoi/sdr.hpp"
#include "risaoi/trace.hpp"
#include "risaoi/validation.hpp"
