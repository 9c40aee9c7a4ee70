#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

namespace epsim {

/// How a replication-style kernel is executed. `workers <= 1` selects the
/// serial reference path; otherwise an OpenMP team of that size is used.
/// Each index writes only its own slot, so results never depend on the
/// worker count.
struct ExecPolicy {
  int workers = 1;

  [[nodiscard]] bool serial() const { return workers <= 1; }
  static ExecPolicy serial_policy() { return ExecPolicy{1}; }
};

/// Serial reference loop.
template <class Fn>
void for_each_index_serial(std::size_t count, Fn&& fn) {
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

/// OpenMP loop. Exceptions thrown by `fn` are captured per index and the
/// first one (lowest index) is rethrown after the team joins.
template <class Fn>
void for_each_index_parallel(std::size_t count, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class Fn>
void for_each_index(std::size_t count, const ExecPolicy& policy, Fn&& fn) {
  if (policy.serial()) {
    for_each_index_serial(count, fn);
  } else {
    for_each_index_parallel(count, policy.workers, fn);
  }
}

/// Outcome of one isolated replication.
template <class T>
struct Replicate {
  std::optional<T> value;
  std::string error;
};

/// Runs `fn(i)` for every index, isolating failures: a throwing replication
/// records its message and leaves the other slots untouched.
template <class T, class Fn>
std::vector<Replicate<T>> run_isolated(std::size_t count, const ExecPolicy& policy, Fn&& fn) {
  std::vector<Replicate<T>> out(count);
  for_each_index(count, policy, [&](std::size_t i) {
    try {
      out[i].value = fn(i);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace epsim
