#pragma once

#include "renewal/continuation.hpp"
#include "renewal/dynamics.hpp"
#include "renewal/errors.hpp"
#include "renewal/legacy.hpp"
#include "renewal/mesh.hpp"
#include "renewal/model.hpp"
#include "renewal/spectral.hpp"
#include "renewal/system.hpp"
