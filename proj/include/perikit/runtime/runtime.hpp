#pragma once

// Data-parallel loops, asynchronously launched tasks with join barriers, and
// per-thread busy-time instrumentation. Every hot loop in the toolkit runs
// through this interface.
//
// Contract: a loop body may write only to output slots owned by its own index,
// so numerical results are independent of the worker count and of chunk
// placement. Reductions that cross the parallel boundary are computed in a
// fixed order elsewhere (see kernels), never by racing accumulators here.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "perikit/core/common.hpp"

namespace perikit::rt {

namespace detail {
struct TaskState;
}

// Completion token of an asynchronously launched loop or job.
// Joinable exactly once; joining rethrows the task's error.
class TaskHandle {
 public:
  TaskHandle() = default;

  bool valid() const { return state_ != nullptr; }
  const std::string& name() const;

  // Blocks until the task completes. Throws the task's failure, if any.
  void join();

 private:
  friend TaskHandle parallel_for_async(std::size_t, std::size_t,
                                       std::function<void(std::size_t)>,
                                       std::string);
  explicit TaskHandle(std::shared_ptr<detail::TaskState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::TaskState> state_;
};

// Worker-pool size control. Takes effect for subsequent loops; safe to call
// between runs (not from inside a loop body).
void set_thread_count(unsigned n);
unsigned thread_count();

// Executes body(i) for every i in [begin, end), distributed over the pool in
// static contiguous chunks. Returns when all indices are done; rethrows the
// first body failure. Nested calls from inside a body run serially inline.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

// Same loop, launched asynchronously. The returned handle must be joined
// (or passed to wait_all) before the outputs are read.
TaskHandle parallel_for_async(std::size_t begin, std::size_t end,
                              std::function<void(std::size_t)> body,
                              std::string name = {});

// Joins every handle; collects all failures and throws one aggregated error
// naming the failed tasks.
void wait_all(std::span<TaskHandle> handles);
inline void wait_all(std::vector<TaskHandle>& handles) {
  wait_all(std::span<TaskHandle>(handles));
}

struct PerfCounters {
  struct Thread {
    unsigned id = 0;
    double busy_s = 0.0;
    double wall_s = 0.0;
    double utilization = 0.0;  // busy/wall, clamped to [0,1]
  };
  std::vector<Thread> threads;
  double wall_s = 0.0;
};

// Busy/wall seconds per worker since the last reset (or pool start).
PerfCounters collect_counters();
void reset_counters();

// CSV dump, schema: thread,busy_s,wall_s,utilization
std::string counters_csv(const PerfCounters& c);

}  // namespace perikit::rt
