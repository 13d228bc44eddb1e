#pragma once

// Umbrella header: survival-analysis engine for sponsorship renewal data.

#include <sponsurv/cox.hpp>
#include <sponsurv/csv.hpp>
#include <sponsurv/design.hpp>
#include <sponsurv/error.hpp>
#include <sponsurv/forecast.hpp>
#include <sponsurv/life_table.hpp>
#include <sponsurv/model_io.hpp>
#include <sponsurv/panel.hpp>
#include <sponsurv/plot.hpp>
#include <sponsurv/report.hpp>
#include <sponsurv/simulate.hpp>
#include <sponsurv/version.hpp>
