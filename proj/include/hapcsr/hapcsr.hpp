#pragma once

#include "hapcsr/phy_model.hpp"
#include "hapcsr/rate_model.hpp"
#include "hapcsr/simplex.hpp"
#include "hapcsr/allocator.hpp"
#include "hapcsr/oracle.hpp"
#include "hapcsr/report_io.hpp"
#include "hapcsr/config.hpp"
#include "hapcsr/experiments.hpp"
