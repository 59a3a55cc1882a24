// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rankbudget Authors

#pragma once

#include "rankbudget/core.hpp"
#include "rankbudget/evaluation.hpp"
#include "rankbudget/harness.hpp"
#include "rankbudget/latency.hpp"
#include "rankbudget/llm_client.hpp"
#include "rankbudget/oracles.hpp"
#include "rankbudget/rankers.hpp"
#include "rankbudget/stats.hpp"
#include "rankbudget/synthetic.hpp"
