// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#ifndef BYZLAB_BYZLAB_HPP_
#define BYZLAB_BYZLAB_HPP_

#include "byzlab/adversary.hpp"
#include "byzlab/base.hpp"
#include "byzlab/bb.hpp"
#include "byzlab/crypto.hpp"
#include "byzlab/fallback.hpp"
#include "byzlab/harness.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/metrics.hpp"
#include "byzlab/net.hpp"
#include "byzlab/strong_ff.hpp"
#include "byzlab/trace.hpp"
#include "byzlab/weak_ba.hpp"

#endif  // BYZLAB_BYZLAB_HPP_
