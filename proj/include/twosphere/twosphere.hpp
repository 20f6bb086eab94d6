#pragma once

#include "twosphere/capacitance.hpp"
#include "twosphere/errors.hpp"
#include "twosphere/fields.hpp"
#include "twosphere/fit.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/oracle.hpp"
#include "twosphere/scattering.hpp"
#include "twosphere/specfun.hpp"
#include "twosphere/spectra.hpp"
#include "twosphere/summation.hpp"
