#pragma once

#include "config.hpp"

namespace epirenew::tool {

int cmd_simulate(const RunConfig& config);
int cmd_fit(const RunConfig& config);
int cmd_twostage(const RunConfig& config);
int cmd_mediate(const RunConfig& config);
int cmd_verify(const RunConfig& config);

}  // namespace epirenew::tool
