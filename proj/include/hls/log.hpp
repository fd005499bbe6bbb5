#pragma once

#include <string>

namespace hls {

void set_verbose(bool on);
bool verbose();
/// Diagnostic line on stderr, shown only in verbose mode.
void warn(const std::string& message);

}  // namespace hls
