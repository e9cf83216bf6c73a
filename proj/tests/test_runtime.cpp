#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

#include "perikit/runtime/runtime.hpp"

using namespace perikit;

TEST_CASE("parallel_for executes every index exactly once") {
  rt::set_thread_count(4);
  const std::size_t n = 10007;
  std::vector<std::atomic<int>> tally(n);
  rt::parallel_for(0, n, [&](std::size_t i) { tally[i].fetch_add(1); });
  for (std::size_t i = 0; i < n; ++i) CHECK(tally[i].load() == 1);
}

TEST_CASE("parallel_for with empty range is a no-op") {
  bool touched = false;
  rt::parallel_for(5, 5, [&](std::size_t) { touched = true; });
  CHECK_FALSE(touched);
}

TEST_CASE("parallel vector sum matches the serial loop bitwise") {
  rt::set_thread_count(3);
  const std::size_t n = 4097;
  std::vector<double> p(n), x(n), h(n), h_serial(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = 0.1 * static_cast<double>(i) + 0.7;
    x[i] = 1.0 / (1.0 + static_cast<double>(i));
  }
  rt::parallel_for(0, n, [&](std::size_t i) { h[i] = p[i] + x[i]; });
  for (std::size_t i = 0; i < n; ++i) h_serial[i] = p[i] + x[i];
  CHECK(h == h_serial);
}

TEST_CASE("two async loops synchronized before a dependent third") {
  rt::set_thread_count(4);
  const std::size_t n = 2000;
  std::vector<double> p(n, 1.0), x(n, 2.0), h(n, 0.0);
  std::vector<rt::TaskHandle> deps;
  deps.push_back(
      rt::parallel_for_async(0, n, [&](std::size_t i) { p[i] += 1.0; }, "inc-p"));
  deps.push_back(
      rt::parallel_for_async(0, n, [&](std::size_t i) { x[i] -= 1.0; }, "dec-x"));
  rt::wait_all(deps);
  rt::parallel_for(0, n, [&](std::size_t i) { h[i] = p[i] + x[i]; });
  for (std::size_t i = 0; i < n; ++i) CHECK(h[i] == 3.0);
}

TEST_CASE("wait_all on an empty list returns immediately") {
  std::vector<rt::TaskHandle> none;
  CHECK_NOTHROW(rt::wait_all(none));
}

TEST_CASE("wait_all aggregates failures and names the failed task") {
  rt::set_thread_count(2);
  std::vector<rt::TaskHandle> deps;
  deps.push_back(rt::parallel_for_async(
      0, 4, [](std::size_t i) { if (i == 2) throw std::runtime_error("boom"); },
      "bad-task"));
  deps.push_back(rt::parallel_for_async(0, 4, [](std::size_t) {}, "good-task"));
  try {
    rt::wait_all(deps);
    FAIL("expected aggregated failure");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad-task") != std::string::npos);
    CHECK(msg.find("boom") != std::string::npos);
  }
}

TEST_CASE("task handles join exactly once") {
  auto h = rt::parallel_for_async(0, 1, [](std::size_t) {});
  h.join();
  CHECK_THROWS_AS(h.join(), Error);
}

TEST_CASE("counters report one entry per worker") {
  rt::set_thread_count(1);
  rt::reset_counters();
  rt::parallel_for(0, 64, [](std::size_t) {});
  const auto counters = rt::collect_counters();
  CHECK(counters.threads.size() == 1);
  for (const auto& t : counters.threads) {
    CHECK(t.utilization >= 0.0);
    CHECK(t.utilization <= 1.0);
  }
}

TEST_CASE("serial workload on four workers leaves three idle") {
  rt::set_thread_count(4);
  rt::reset_counters();
  // Single chunk: range of one index.
  rt::parallel_for(0, 1, [](std::size_t) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  });
  const auto counters = rt::collect_counters();
  REQUIRE(counters.threads.size() == 4);
  int near_zero = 0;
  for (const auto& t : counters.threads) {
    if (t.busy_s < 5e-3) ++near_zero;
  }
  CHECK(near_zero >= 3);
  const auto csv = rt::counters_csv(counters);
  CHECK(csv.rfind("thread,busy_s,wall_s,utilization\n", 0) == 0);
}
