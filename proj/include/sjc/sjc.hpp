#pragma once

#include "sjc/calendar.hpp"
#include "sjc/config.hpp"
#include "sjc/copula.hpp"
#include "sjc/estimator.hpp"
#include "sjc/fixture.hpp"
#include "sjc/io.hpp"
#include "sjc/margins.hpp"
#include "sjc/optimize.hpp"
#include "sjc/panel.hpp"
#include "sjc/parallel.hpp"
#include "sjc/random.hpp"
#include "sjc/sampler.hpp"
#include "sjc/study.hpp"
#include "sjc/volatility.hpp"
