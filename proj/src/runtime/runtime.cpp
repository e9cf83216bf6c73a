#include "perikit/runtime/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "perikit/core/common.hpp"

namespace perikit::rt {

namespace detail {

using clock = std::chrono::steady_clock;

struct TaskState {
  std::string name;
  std::mutex mtx;
  std::condition_variable cv;
  std::size_t pending = 0;
  bool joined = false;
  std::vector<std::string> errors;  // messages of failed chunks

  void chunk_done(const char* what) {
    std::lock_guard<std::mutex> lk(mtx);
    if (what) errors.emplace_back(what);
    if (--pending == 0) cv.notify_all();
  }
  void wait() {
    std::unique_lock<std::mutex> lk(mtx);
    cv.wait(lk, [&] { return pending == 0; });
  }
};

struct Pool {
  struct Job {
    std::function<void()> fn;
  };

  std::mutex mtx;
  std::condition_variable cv;
  std::deque<Job> jobs;
  std::vector<std::thread> workers;
  std::vector<std::atomic<std::int64_t>> busy_ns;  // per worker
  bool stop = false;
  clock::time_point epoch = clock::now();

  static Pool& instance() {
    static Pool p;
    return p;
  }

  Pool() { resize(default_thread_count()); }

  ~Pool() { shutdown(); }

  static unsigned default_thread_count() {
    if (const char* env = std::getenv("PERIKIT_THREADS")) {
      const long v = std::atol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
  }

  void shutdown() {
    {
      std::lock_guard<std::mutex> lk(mtx);
      stop = true;
    }
    cv.notify_all();
    for (auto& w : workers)
      if (w.joinable()) w.join();
    workers.clear();
  }

  void resize(unsigned n) {
    if (n < 1) n = 1;
    shutdown();
    {
      std::lock_guard<std::mutex> lk(mtx);
      stop = false;
    }
    busy_ns = std::vector<std::atomic<std::int64_t>>(n);
    for (auto& b : busy_ns) b.store(0, std::memory_order_relaxed);
    epoch = clock::now();
    workers.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
      workers.emplace_back([this, t] { worker_loop(t); });
    }
  }

  void submit(std::function<void()> fn) {
    {
      std::lock_guard<std::mutex> lk(mtx);
      jobs.push_back({std::move(fn)});
    }
    cv.notify_one();
  }

  void worker_loop(unsigned id) {
    for (;;) {
      Job job;
      {
        std::unique_lock<std::mutex> lk(mtx);
        cv.wait(lk, [&] { return stop || !jobs.empty(); });
        if (stop && jobs.empty()) return;
        job = std::move(jobs.front());
        jobs.pop_front();
      }
      const auto t0 = clock::now();
      job.fn();
      const auto t1 = clock::now();
      busy_ns[id].fetch_add(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count(),
          std::memory_order_relaxed);
    }
  }
};

// Set while a worker executes a loop chunk; nested loops then run inline.
thread_local bool in_worker_chunk = false;

std::shared_ptr<TaskState> launch(std::size_t begin, std::size_t end,
                                  std::function<void(std::size_t)> body,
                                  std::string name) {
  auto state = std::make_shared<TaskState>();
  state->name = std::move(name);

  const std::size_t n = end > begin ? end - begin : 0;
  if (n == 0) {
    state->pending = 0;
    return state;
  }

  auto& pool = Pool::instance();
  const std::size_t nchunks =
      std::min<std::size_t>(n, pool.workers.empty() ? 1 : pool.workers.size());
  state->pending = nchunks;

  auto shared_body = std::make_shared<std::function<void(std::size_t)>>(std::move(body));
  // Static contiguous chunks; chunk boundaries never influence values because
  // bodies write only index-owned slots.
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t b = begin + (n * c) / nchunks;
    const std::size_t e = begin + (n * (c + 1)) / nchunks;
    pool.submit([state, shared_body, b, e] {
      in_worker_chunk = true;
      const char* err = nullptr;
      std::string msg;
      try {
        for (std::size_t i = b; i < e; ++i) (*shared_body)(i);
      } catch (const std::exception& ex) {
        msg = ex.what();
        err = msg.c_str();
      } catch (...) {
        msg = "unknown error";
        err = msg.c_str();
      }
      in_worker_chunk = false;
      state->chunk_done(err);
    });
  }
  return state;
}

void rethrow(const TaskState& st) {
  if (st.errors.empty()) return;
  std::ostringstream os;
  os << "task";
  if (!st.name.empty()) os << " '" << st.name << "'";
  os << " failed: " << st.errors.front();
  if (st.errors.size() > 1) os << " (+" << st.errors.size() - 1 << " more)";
  throw Error(os.str());
}

}  // namespace detail

const std::string& TaskHandle::name() const {
  static const std::string empty;
  return state_ ? state_->name : empty;
}

void TaskHandle::join() {
  if (!state_) throw Error("TaskHandle: join on empty handle");
  auto s = std::move(state_);
  if (s->joined) throw Error("TaskHandle: joined twice");
  s->wait();
  s->joined = true;
  detail::rethrow(*s);
}

void set_thread_count(unsigned n) { detail::Pool::instance().resize(n); }

unsigned thread_count() {
  return static_cast<unsigned>(detail::Pool::instance().workers.size());
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body) {
  if (detail::in_worker_chunk) {
    // Nested loop inside a worker: run serially to keep the pool deadlock-free.
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  auto state = detail::launch(begin, end, body, {});
  state->wait();
  state->joined = true;
  detail::rethrow(*state);
}

TaskHandle parallel_for_async(std::size_t begin, std::size_t end,
                              std::function<void(std::size_t)> body,
                              std::string name) {
  if (detail::in_worker_chunk) {
    // Run inline; hand back an already-completed token.
    auto state = std::make_shared<detail::TaskState>();
    state->name = std::move(name);
    try {
      for (std::size_t i = begin; i < end; ++i) body(i);
    } catch (const std::exception& ex) {
      state->errors.emplace_back(ex.what());
    }
    return TaskHandle(state);
  }
  return TaskHandle(detail::launch(begin, end, std::move(body), std::move(name)));
}

void wait_all(std::span<TaskHandle> handles) {
  std::vector<std::string> failures;
  for (auto& h : handles) {
    try {
      if (h.valid()) h.join();
    } catch (const std::exception& ex) {
      failures.emplace_back(ex.what());
    }
  }
  if (!failures.empty()) {
    std::ostringstream os;
    os << "wait_all: " << failures.size() << " task(s) failed:";
    for (const auto& f : failures) os << "\n  " << f;
    throw Error(os.str());
  }
}

PerfCounters collect_counters() {
  auto& pool = detail::Pool::instance();
  PerfCounters out;
  const double wall =
      std::chrono::duration<double>(detail::clock::now() - pool.epoch).count();
  out.wall_s = wall;
  out.threads.resize(pool.busy_ns.size());
  for (std::size_t t = 0; t < pool.busy_ns.size(); ++t) {
    auto& row = out.threads[t];
    row.id = static_cast<unsigned>(t);
    row.busy_s = 1e-9 * static_cast<double>(pool.busy_ns[t].load(std::memory_order_relaxed));
    row.wall_s = wall;
    row.utilization = wall > 0 ? std::min(1.0, std::max(0.0, row.busy_s / wall)) : 0.0;
  }
  return out;
}

void reset_counters() {
  auto& pool = detail::Pool::instance();
  for (auto& b : pool.busy_ns) b.store(0, std::memory_order_relaxed);
  pool.epoch = detail::clock::now();
}

std::string counters_csv(const PerfCounters& c) {
  std::ostringstream os;
  os << "thread,busy_s,wall_s,utilization\n";
  for (const auto& t : c.threads) {
    os << t.id << ',' << t.busy_s << ',' << t.wall_s << ',' << t.utilization << '\n';
  }
  return os.str();
}

}  // namespace perikit::rt
