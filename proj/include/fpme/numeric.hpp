// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace fpme {

/// Pairwise (cascade) summation. All quadrature reductions in the library
/// go through this so that results are a pure function of operand order,
/// never of chunking or thread count.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

/// Format a double with 17 significant digits (round-trip exact).
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Ordinary least squares y = a*x + b; returns {slope, intercept, r_squared}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t count = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit out;
  const std::size_t n = std::min(x.size(), y.size());
  out.count = n;
  if (n < 2) return out;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

/// Thread cap: min(requested, FPME_THREADS env, hardware). Parallel loops
/// partition by index so each worker owns a disjoint slice; no reductions
/// happen across workers.
inline unsigned thread_cap(unsigned requested = 0) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned cap = requested == 0 ? hw : std::min(requested, hw);
  if (const char* env = std::getenv("FPME_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = std::min<unsigned>(cap, static_cast<unsigned>(v));
  }
  return std::max(1u, cap);
}

/// Run body(i) for i in [0, count) across at most thread_cap() threads.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned nt = std::min<std::size_t>(thread_cap(), count);
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([=, &body] {
      for (std::size_t i = t; i < count; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace fpme
