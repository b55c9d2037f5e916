#include "qhed/executor.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <new>
#include <thread>
#include <vector>

#include "qhed/error.hpp"

namespace qhed {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task,
                  const std::function<std::string(std::size_t)>& describe) {
  if (workers < 1) throw DomainError("workers must be at least 1");
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr failure;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        failed = true;
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!failure) return;
  const std::string where = describe(failed_index);
  try {
    std::rethrow_exception(failure);
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  } catch (const std::bad_alloc&) {
    throw Error(ErrorKind::Resource, where + ": out of memory");
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Numerical, where + ": " + e.what());
  }
}

}  // namespace qhed
