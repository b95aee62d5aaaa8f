#pragma once

#include "ghmix/bessel.hpp"
#include "ghmix/em.hpp"
#include "ghmix/error.hpp"
#include "ghmix/ghd.hpp"
#include "ghmix/gig.hpp"
#include "ghmix/metrics.hpp"
#include "ghmix/mixture.hpp"
#include "ghmix/model_search.hpp"
#include "ghmix/random.hpp"
#include "ghmix/io/dataset.hpp"
#include "ghmix/io/density_grid.hpp"
#include "ghmix/io/result_document.hpp"
#include "ghmix/io/simulate.hpp"
