// Pulls every public header into one translation unit as a build check of the header-only library.
#include "hstkit/adversary.hpp"
#include "hstkit/common.hpp"
#include "hstkit/exact.hpp"
#include "hstkit/experiments.hpp"
#include "hstkit/hst.hpp"
#include "hstkit/io.hpp"
#include "hstkit/kserver.hpp"
#include "hstkit/metric.hpp"
#include "hstkit/mts.hpp"
#include "hstkit/probcheck.hpp"
#include "hstkit/ramsey.hpp"
