#pragma once

#include <string>
#include <vector>

namespace probfp::diagnostics {

// Process-wide warning sink. Warnings are kept in emission order.
void warn(std::string message);
std::vector<std::string> drain();
std::vector<std::string> peek();

}  // namespace probfp::diagnostics
