// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cocyclelab/algebra.hpp"
#include "cocyclelab/arithmetic.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/errors.hpp"
#include "cocyclelab/fourier.hpp"
#include "cocyclelab/io.hpp"
#include "cocyclelab/random.hpp"
#include "cocyclelab/reduction.hpp"
#include "cocyclelab/renorm.hpp"
