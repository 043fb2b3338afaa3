#include "kgtc/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace kgtc::log {
namespace {

std::mutex g_mutex;
std::atomic<Level> g_min_level{Level::warn};

const char* level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "?";
}

void stderr_sink(Level level, std::string_view message) {
  std::fprintf(stderr, "[kgtc %s] %.*s\n", level_name(level),
               static_cast<int>(message.size()), message.data());
}

Sink& current_sink() {
  static Sink sink = stderr_sink;
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  Sink previous = std::move(current_sink());
  current_sink() = sink ? std::move(sink) : Sink(stderr_sink);
  return previous;
}

void set_min_level(Level level) { g_min_level = level; }

void write(Level level, std::string_view message) {
  if (level < g_min_level.load()) return;
  std::lock_guard lock(g_mutex);
  current_sink()(level, message);
}

}  // namespace kgtc::log
