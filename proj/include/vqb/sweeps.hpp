// Copyright 2026 The vqb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// @file sweeps.hpp
/// Batches of overhead and trade-off solves turned into SweepRecord rows.

#include "vqb/broadcast.hpp"
#include "vqb/records.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vqb {

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Results are stored
/// by index, so the output order never depends on scheduling.
template <class T>
std::vector<T> parallel_map(std::size_t n, std::size_t jobs, const std::function<T(std::size_t)>& task) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::thread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void fill_outputs(SweepRecord& r, SolveStatus status, const SdpSolution& sol) {
  r.status = record_status(status);
  if (status == SolveStatus::optimal) r.gap = sol.gap;
}

}  // namespace detail

inline SweepRecord exact_record(std::size_t d, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const OverheadResult res = exact_overhead(d, cfg);
  SweepRecord r;
  r.d = d;
  detail::fill_outputs(r, res.status, res.solution);
  if (res.ok()) {
    r.nu = res.nu;
    r.s = res.s;
  }
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline SweepRecord approx_record(double a, double b, std::size_t d, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const OverheadResult res = approx_overhead({a, b}, d, cfg);
  SweepRecord r;
  r.a = a;
  r.b = b;
  r.d = d;
  detail::fill_outputs(r, res.status, res.solution);
  if (res.ok()) {
    r.nu = res.nu;
    r.s = res.s;
  }
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline SweepRecord tradeoff_record(double gamma, std::size_t d, const SolverConfig& cfg,
                                   std::optional<double> fixed_delta = std::nullopt) {
  const auto t0 = std::chrono::steady_clock::now();
  const TradeoffPoint res = min_error(gamma, d, cfg, fixed_delta);
  SweepRecord r;
  r.gamma = gamma;
  r.d = d;
  detail::fill_outputs(r, res.status, res.solution);
  if (res.ok()) {
    r.nu = res.nu;
    r.s = res.nu * res.nu;
    r.mu = res.mu;
    r.t = res.t;
  }
  r.seconds = detail::seconds_since(t0);
  return r;
}

/// grid x grid points a_i = i/(grid-1), b_j = j/(grid-1).
inline std::vector<SweepRecord> sweep_ab(std::size_t grid, std::size_t d, const SolverConfig& cfg,
                                         std::size_t jobs = 1) {
  if (grid < 2) throw InvariantError("grid must have at least two points per axis");
  const double last = static_cast<double>(grid - 1);
  return parallel_map<SweepRecord>(grid * grid, jobs, [&](std::size_t k) {
    return approx_record(static_cast<double>(k / grid) / last, static_cast<double>(k % grid) / last, d, cfg);
  });
}

inline std::vector<SweepRecord> tradeoff(const std::vector<double>& gammas, const std::vector<std::size_t>& dims,
                                         const SolverConfig& cfg, std::size_t jobs = 1) {
  return parallel_map<SweepRecord>(gammas.size() * dims.size(), jobs, [&](std::size_t k) {
    return tradeoff_record(gammas[k / dims.size()], dims[k % dims.size()], cfg);
  });
}

}  // namespace vqb
