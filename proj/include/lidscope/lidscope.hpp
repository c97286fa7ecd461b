#pragma once

#include "lidscope/analysis.hpp"
#include "lidscope/csv.hpp"
#include "lidscope/error.hpp"
#include "lidscope/knn.hpp"
#include "lidscope/lide_io.hpp"
#include "lidscope/log.hpp"
#include "lidscope/parallel.hpp"
#include "lidscope/pipeline.hpp"
#include "lidscope/point_cloud.hpp"
#include "lidscope/random.hpp"
#include "lidscope/summary.hpp"
#include "lidscope/twonn.hpp"
