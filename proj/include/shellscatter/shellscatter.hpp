#pragma once

#include "shellscatter/units.hpp"
#include "shellscatter/errors.hpp"
#include "shellscatter/coeffs.hpp"
#include "shellscatter/waves.hpp"
#include "shellscatter/green.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/transforms.hpp"
#include "shellscatter/scattering.hpp"
#include "shellscatter/evolution.hpp"
#include "shellscatter/io.hpp"
#include "shellscatter/verify.hpp"
