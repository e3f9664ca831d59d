#pragma once

// Site-loop execution policies. Every per-site kernel in the library runs
// through these helpers, so the serial path doubles as the reference
// implementation for the OpenMP one. Reductions gather per-index terms and
// sum them in index order, which keeps results bit-identical across
// policies and thread counts.

#include <cstddef>
#include <vector>

namespace ymh {

enum class Exec { serial, parallel };

Exec default_exec() noexcept;
void set_default_exec(Exec exec) noexcept;
int max_threads() noexcept;

template <class Fn>
void for_each_index(std::size_t count, Exec exec, Fn&& fn) {
  const auto n = static_cast<std::ptrdiff_t>(count);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
  }
}

template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
  for_each_index(count, default_exec(), static_cast<Fn&&>(fn));
}

template <class Fn>
double sum_over(std::size_t count, Exec exec, Fn&& fn) {
  std::vector<double> terms(count);
  for_each_index(count, exec, [&](std::size_t i) { terms[i] = fn(i); });
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

template <class Fn>
double sum_over(std::size_t count, Fn&& fn) {
  return sum_over(count, default_exec(), static_cast<Fn&&>(fn));
}

template <class Fn>
double max_over(std::size_t count, Exec exec, Fn&& fn) {
  std::vector<double> terms(count);
  for_each_index(count, exec, [&](std::size_t i) { terms[i] = fn(i); });
  double best = 0.0;
  for (double t : terms) best = t > best ? t : best;
  return best;
}

template <class Fn>
double max_over(std::size_t count, Fn&& fn) {
  return max_over(count, default_exec(), static_cast<Fn&&>(fn));
}

}  // namespace ymh
