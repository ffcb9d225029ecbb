#pragma once

#include "elmboost/boosting.hpp"
#include "elmboost/dataset.hpp"
#include "elmboost/error.hpp"
#include "elmboost/linalg.hpp"
#include "elmboost/matrix.hpp"
#include "elmboost/model_store.hpp"
#include "elmboost/projection.hpp"
