#pragma once

#include <string>

namespace epirenew::tool {

// ISO calendar dates handled as day counts since 1970-01-01.
int parse_date(const std::string& iso);
std::string format_date(int days);

}  // namespace epirenew::tool
