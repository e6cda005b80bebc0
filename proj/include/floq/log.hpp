#pragma once

#include <functional>
#include <string>

namespace floq {

// Warnings go through one replaceable sink so tests can capture them.
using WarningSink = std::function<void(const std::string&)>;

void warn(const std::string& msg);
WarningSink set_warning_sink(WarningSink sink);  // returns the previous sink

}  // namespace floq
