#pragma once

#include "agentquest/agents.hpp"
#include "agentquest/core.hpp"
#include "agentquest/envs/mastermind.hpp"
#include "agentquest/envs/sudoku.hpp"
#include "agentquest/harness/config.hpp"
#include "agentquest/harness/persistence.hpp"
#include "agentquest/harness/report.hpp"
#include "agentquest/harness/run.hpp"
#include "agentquest/llm_agent.hpp"
#include "agentquest/metrics.hpp"
