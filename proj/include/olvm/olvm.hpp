#pragma once

#include "concentration.hpp"
#include "decomposition.hpp"
#include "dense_tensor.hpp"
#include "evaluation.hpp"
#include "experiments.hpp"
#include "implicit_moment.hpp"
#include "models.hpp"
#include "moment_oracle.hpp"
#include "random.hpp"
#include "samples.hpp"
#include "spectral_norm.hpp"
