#pragma once

#include <atomic>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "lgp/detector.hpp"

namespace lgp::tools {

template <class Fn>
auto parallel_map(const ToolConfig& cfg, std::size_t n, int workers, Fn fn)
    -> std::vector<decltype(fn(std::declval<const DetectorAdapter&>(), std::size_t{}))> {
  using R = decltype(fn(std::declval<const DetectorAdapter&>(), std::size_t{}));
  auto& registry = AdapterRegistry::instance();
  std::vector<std::optional<R>> slots(n);
  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1))));

  std::shared_ptr<DetectorAdapter> shared(registry.create(cfg.detector));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&](std::shared_ptr<DetectorAdapter> adapter) {
    try {
      for (std::size_t i = next++; i < n; i = next++) {
        slots[i].emplace(fn(*adapter, i));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next = n;
    }
  };

  if (threads == 1) {
    work(shared);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      auto adapter = shared->reentrant() || t == 0
                         ? shared
                         : std::shared_ptr<DetectorAdapter>(registry.create(cfg.detector));
      pool.emplace_back(work, std::move(adapter));
    }
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace lgp::tools
