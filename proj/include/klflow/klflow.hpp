#pragma once

#include "klflow/certificate.hpp"
#include "klflow/condition.hpp"
#include "klflow/core.hpp"
#include "klflow/corpus.hpp"
#include "klflow/csv.hpp"
#include "klflow/experiment.hpp"
#include "klflow/flow.hpp"
#include "klflow/parameter_function.hpp"
#include "klflow/prox.hpp"
#include "klflow/quadrature.hpp"
#include "klflow/recursion.hpp"
#include "klflow/sampling.hpp"
#include "klflow/slope.hpp"
