#ifndef COVCUSUM_COVCUSUM_HPP
#define COVCUSUM_COVCUSUM_HPP

#include "covcusum/common.hpp"
#include "covcusum/cpe.hpp"
#include "covcusum/cusum.hpp"
#include "covcusum/dist.hpp"
#include "covcusum/harness.hpp"
#include "covcusum/io.hpp"
#include "covcusum/linproc.hpp"
#include "covcusum/lrv.hpp"
#include "covcusum/projections.hpp"
#include "covcusum/segmentation.hpp"
#include "covcusum/testing.hpp"

#endif
