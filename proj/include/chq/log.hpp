#pragma once

#include <functional>
#include <string>

namespace chq {

/// Warnings (truncation, resampling) go through one process-wide sink.
/// The default sink writes "warning: <msg>" to stderr.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& msg);

}  // namespace chq
