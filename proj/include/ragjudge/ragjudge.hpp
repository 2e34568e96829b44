// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ragjudge/automaton.hpp"
#include "ragjudge/backend.hpp"
#include "ragjudge/core_types.hpp"
#include "ragjudge/datasets.hpp"
#include "ragjudge/errors.hpp"
#include "ragjudge/http_transport.hpp"
#include "ragjudge/metrics.hpp"
#include "ragjudge/pipeline.hpp"
#include "ragjudge/prompting.hpp"
#include "ragjudge/schema.hpp"
#include "ragjudge/verdict_parsing.hpp"
