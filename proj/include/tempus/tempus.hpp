#pragma once

#include <tempus/core.hpp>
#include <tempus/widths.hpp>
#include <tempus/dynamics.hpp>
#include <tempus/abm.hpp>
#include <tempus/timepovm.hpp>
#include <tempus/clock.hpp>
#include <tempus/interference.hpp>
