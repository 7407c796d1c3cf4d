#include "probfp/diagnostics.hpp"

#include <mutex>

namespace probfp::diagnostics {
namespace {
std::mutex mu;
std::vector<std::string>& sink() {
  static std::vector<std::string> s;
  return s;
}
}  // namespace

void warn(std::string message) {
  std::lock_guard<std::mutex> lock(mu);
  sink().push_back(std::move(message));
}

std::vector<std::string> drain() {
  std::lock_guard<std::mutex> lock(mu);
  std::vector<std::string> out;
  out.swap(sink());
  return out;
}

std::vector<std::string> peek() {
  std::lock_guard<std::mutex> lock(mu);
  return sink();
}

}  // namespace probfp::diagnostics
