#pragma once

#include "rbk/error.hpp"
#include "rbk/core.hpp"
#include "rbk/integrate.hpp"
#include "rbk/asymptotics.hpp"
#include "rbk/harness.hpp"
#include "rbk/io.hpp"
#include "rbk/config.hpp"
#include "rbk/fixtures.hpp"
