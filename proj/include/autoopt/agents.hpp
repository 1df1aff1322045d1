#pragma once

#include "autoopt/agents/describe.hpp"
#include "autoopt/agents/fewshot.hpp"
#include "autoopt/agents/prompts.hpp"
#include "autoopt/agents/remote.hpp"
#include "autoopt/agents/rule_based.hpp"
#include "autoopt/agents/text.hpp"
#include "autoopt/agents/types.hpp"
