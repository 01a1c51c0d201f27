#pragma once

#include "holdswitch/classifiers/features.hpp"
#include "holdswitch/classifiers/grid_search.hpp"
#include "holdswitch/classifiers/logistic.hpp"
#include "holdswitch/classifiers/model.hpp"
#include "holdswitch/classifiers/scaler.hpp"
#include "holdswitch/classifiers/spec.hpp"
#include "holdswitch/classifiers/svm.hpp"
#include "holdswitch/classifiers/tree.hpp"
