#pragma once

#include "ralg/errors.hpp"
#include "ralg/hyperdual.hpp"
#include "ralg/expression.hpp"
#include "ralg/tensor.hpp"
#include "ralg/sampling.hpp"
#include "ralg/algebroid.hpp"
#include "ralg/metric.hpp"
#include "ralg/paths.hpp"
#include "ralg/dual_matrix.hpp"
#include "ralg/hamiltonian.hpp"
#include "ralg/oneill.hpp"
#include "ralg/variations.hpp"
#include "ralg/catalog.hpp"
#include "ralg/io.hpp"
