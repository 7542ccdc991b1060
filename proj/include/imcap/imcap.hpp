// SPDX-License-Identifier: MIT

#ifndef IMCAP_IMCAP_HPP
#define IMCAP_IMCAP_HPP

#include "imcap/channels.hpp"
#include "imcap/core.hpp"
#include "imcap/ergodic.hpp"
#include "imcap/errors.hpp"
#include "imcap/instcap.hpp"
#include "imcap/quad.hpp"
#include "imcap/reference.hpp"
#include "imcap/rng.hpp"
#include "imcap/specfun.hpp"
#include "imcap/sweep.hpp"

#endif
