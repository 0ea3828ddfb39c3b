#pragma once

// Replica-parallel execution with results that do not depend on the worker
// count. Replicas are grouped into contiguous batches; a batch is always
// processed start to finish by one worker, in replica order, so every
// floating-point sum is formed in the same order on every run.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "aep/errors.hpp"
#include "aep/rng.hpp"

namespace aep {

struct EnsembleSpec {
  std::uint64_t seed = 1;
  std::size_t replicas = 0;
  std::size_t batches = 100;
  unsigned threads = 1;
};

/// Replica range [first, last) of batch b.
inline std::pair<std::size_t, std::size_t> batch_range(const EnsembleSpec& spec, std::size_t b) {
  const std::size_t n = spec.replicas;
  const std::size_t nb = spec.batches;
  return {b * n / nb, (b + 1) * n / nb};
}

inline void validate(const EnsembleSpec& spec) {
  if (spec.replicas == 0) fail(ErrorCode::EmptyEnsemble, "no replicas requested");
  if (spec.batches == 0 || spec.batches > spec.replicas) {
    fail(ErrorCode::InvalidConfig, "batch count must be in [1, replicas]");
  }
}

namespace detail {

template <class Body>
void for_each_batch(const EnsembleSpec& spec, Body&& body) {
  validate(spec);
  const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.batches)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= spec.batches) return;
      try {
        body(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(spec.batches);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Runs f(replica, rng) for every replica and stores the results by index.
template <class T, class F>
std::vector<T> run_replicas(const EnsembleSpec& spec, F&& f) {
  std::vector<T> out(spec.replicas);
  detail::for_each_batch(spec, [&](std::size_t b) {
    const auto [first, last] = batch_range(spec, b);
    for (std::size_t r = first; r < last; ++r) {
      auto rng = make_stream(spec.seed, r);
      out[r] = f(r, rng);
    }
  });
  return out;
}

/// Per-batch sums of fixed-width replica summaries.
struct BatchedSums {
  std::size_t width = 0;
  std::vector<std::vector<double>> sums;
  std::vector<std::size_t> counts;

  std::size_t batches() const noexcept { return sums.size(); }
  std::size_t replicas() const noexcept {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
  std::vector<double> batch_mean(std::size_t b) const {
    std::vector<double> m(sums[b]);
    for (auto& v : m) v /= static_cast<double>(counts[b]);
    return m;
  }
  std::vector<double> total_mean() const {
    std::vector<double> m(width, 0.0);
    for (std::size_t b = 0; b < sums.size(); ++b) {
      for (std::size_t i = 0; i < width; ++i) m[i] += sums[b][i];
    }
    const double n = static_cast<double>(replicas());
    for (auto& v : m) v /= n;
    return m;
  }
};

/// Runs f(replica, rng, acc) where f adds the replica's summary into acc
/// (a span of `width` doubles holding the running batch sum).
template <class F>
BatchedSums run_batched(const EnsembleSpec& spec, std::size_t width, F&& f) {
  BatchedSums out;
  out.width = width;
  out.sums.assign(spec.batches, std::vector<double>(width, 0.0));
  out.counts.assign(spec.batches, 0);
  detail::for_each_batch(spec, [&](std::size_t b) {
    const auto [first, last] = batch_range(spec, b);
    for (std::size_t r = first; r < last; ++r) {
      auto rng = make_stream(spec.seed, r);
      f(r, rng, out.sums[b].data());
    }
    out.counts[b] = last - first;
  });
  return out;
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Point estimate g(pooled means) with a batch-means standard error:
/// the spread of g over per-batch means divided by sqrt(batches).
template <class G>
Estimate batch_estimate(const BatchedSums& s, G&& g) {
  Estimate e;
  e.value = g(s.total_mean());
  const std::size_t nb = s.batches();
  if (nb < 2) return e;
  double mean = 0.0;
  std::vector<double> per(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    per[b] = g(s.batch_mean(b));
    mean += per[b];
  }
  mean /= static_cast<double>(nb);
  double ss = 0.0;
  for (double v : per) ss += (v - mean) * (v - mean);
  e.se = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
  return e;
}

/// Vector-valued variant; g returns a vector of fixed length.
template <class G>
std::vector<Estimate> batch_estimates(const BatchedSums& s, G&& g) {
  const std::vector<double> pooled = g(s.total_mean());
  std::vector<Estimate> out(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) out[i].value = pooled[i];
  const std::size_t nb = s.batches();
  if (nb < 2) return out;
  std::vector<std::vector<double>> per(nb);
  std::vector<double> mean(pooled.size(), 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    per[b] = g(s.batch_mean(b));
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += per[b][i];
  }
  const double n = static_cast<double>(nb);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = mean[i] / n;
    double ss = 0.0;
    for (std::size_t b = 0; b < nb; ++b) ss += (per[b][i] - m) * (per[b][i] - m);
    out[i].se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

/// Combined standard error of a difference of estimates treated as independent.
inline double combined_se(double a, double b) { return std::hypot(a, b); }

}  // namespace aep
