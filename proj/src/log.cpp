#include "hls/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace hls {

namespace {
std::atomic<bool> g_verbose{false};
std::mutex g_log_mutex;
}  // namespace

void set_verbose(bool on) { g_verbose.store(on); }
bool verbose() { return g_verbose.load(); }

void warn(const std::string& message) {
  if (!verbose()) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "warning: " << message << '\n';
}

}  // namespace hls
