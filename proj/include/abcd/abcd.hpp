#pragma once

#include "abcd/cli.hpp"
#include "abcd/config.hpp"
#include "abcd/diagnostics.hpp"
#include "abcd/error.hpp"
#include "abcd/format.hpp"
#include "abcd/linear_waves.hpp"
#include "abcd/parallel.hpp"
#include "abcd/params.hpp"
#include "abcd/region_atlas.hpp"
#include "abcd/spectral.hpp"
#include "abcd/trajectory_io.hpp"
#include "abcd/virial.hpp"
#include "abcd/weight.hpp"
