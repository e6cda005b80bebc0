#include "floq/log.hpp"

#include <iostream>
#include <mutex>

namespace floq {
namespace {
std::mutex g_mu;
WarningSink g_sink = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
}  // namespace

void warn(const std::string& msg) {
  std::lock_guard lk(g_mu);
  if (g_sink) g_sink(msg);
}

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lk(g_mu);
  std::swap(sink, g_sink);
  return sink;
}

}  // namespace floq
