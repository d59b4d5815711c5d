#pragma once

// Exhaustive enumeration of perfect permutations and of all Latin squares
// of tiny order.
//
// Perfect permutations are searched with sigma(0) = 0 fixed. The rotations
// j -> sigma(j + c) act freely (sigma(j + c) = sigma(j) for all j forces
// c = 0), every orbit has exactly n members, and exactly one member maps 0
// to 0. Hence total = n * canonical.

#include <latinbal/core.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace latinbal {

enum class EnumerationMode { PerfectPermutations, AllLatinSquares };

/// Largest order accepted by the Latin square enumerator.
inline constexpr int kMaxLatinEnumerationOrder = 6;
/// Largest order the perfect-permutation search supports (64-bit value masks).
inline constexpr int kMaxPerfectEnumerationOrder = 63;

struct EnumerationTask {
  int n = 1;
  EnumerationMode mode = EnumerationMode::PerfectPermutations;
  bool count_only = true;
  std::optional<double> time_limit_seconds;
  int thread_count = 1;
  /// Partial-sum pruning for the perfect search. Disabling it only exists so
  /// the pruned and unpruned trees can be compared.
  bool prune = true;
};

struct EnumerationResult {
  int n = 0;
  EnumerationMode mode = EnumerationMode::PerfectPermutations;
  std::uint64_t total_count = 0;
  std::uint64_t canonical_count = 0;  ///< sigma(0) = 0 representatives; perfect mode only
  std::vector<Permutation> permutations;  ///< every perfect permutation, sorted, unless count_only
  std::vector<LatinSquare> squares;       ///< in lexicographic order, unless count_only
  bool exhausted = false;
  double elapsed_seconds = 0.0;
};

using PermutationConsumer = std::function<void(const Permutation&)>;
using SquareConsumer = std::function<void(const LatinSquare&)>;

namespace detail {

class Deadline {
 public:
  explicit Deadline(std::optional<double> seconds)
      : start_(std::chrono::steady_clock::now()), limit_(seconds) {}

  bool expired() const {
    return limit_ && elapsed() >= *limit_;
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::optional<double> limit_;
};

// Depth-first search over one subtree: sigma(0) = 0, sigma(1) = first_value.
// Placing position j completes, for every earlier position i, one term of
// f(j - i) and one of f(n - (j - i)).
class PerfectSearch {
 public:
  PerfectSearch(int n, bool prune, const Deadline& deadline, std::atomic<bool>& stop)
      : n_(n),
        target_(static_cast<Int>(n) * (n + 1) / 3),
        prune_(prune),
        deadline_(deadline),
        stop_(stop),
        sigma_(static_cast<std::size_t>(n), -1),
        partial_(static_cast<std::size_t>(n), 0),
        remaining_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
    // remaining_[j * n + delta]: terms of f(delta) still open once positions
    // 0..j are assigned.
    for (int j = 0; j < n; ++j)
      for (int delta = 1; delta < n; ++delta) {
        int done = 0;
        for (int i = 0; i <= j; ++i)
          if ((i + delta) % n <= j) ++done;
        remaining_[static_cast<std::size_t>(j) * n + delta] = n - done;
      }
  }

  /// Returns false if interrupted.
  bool run(int first_value, std::vector<std::vector<int>>& found) {
    found_ = &found;
    sigma_[0] = 0;
    used_ = 1;
    if (n_ == 1) {
      record();
      return true;
    }
    if (!place(1, first_value)) return true;
    descend(2);
    unplace(1);
    return !interrupted_;
  }

 private:
  bool place(int j, int v) {
    sigma_[j] = v;
    used_ |= std::uint64_t{1} << v;
    bool ok = true;
    for (int i = 0; i < j; ++i) {
      const Int term = std::abs(v - sigma_[i]);
      partial_[j - i] += term;
      partial_[n_ - (j - i)] += term;
    }
    if (prune_) {
      const Int* open = &remaining_[static_cast<std::size_t>(j) * n_];
      for (int delta = 1; delta < n_ && ok; ++delta)
        ok = partial_[delta] + open[delta] <= target_;
    }
    if (!ok) unplace(j);
    return ok;
  }

  void unplace(int j) {
    const int v = sigma_[j];
    for (int i = 0; i < j; ++i) {
      const Int term = std::abs(v - sigma_[i]);
      partial_[j - i] -= term;
      partial_[n_ - (j - i)] -= term;
    }
    used_ &= ~(std::uint64_t{1} << v);
    sigma_[j] = -1;
  }

  void descend(int j) {
    if (interrupted_) return;
    if ((++nodes_ & 0xFFFF) == 0 && (stop_.load(std::memory_order_relaxed) || deadline_.expired())) {
      interrupted_ = true;
      stop_.store(true, std::memory_order_relaxed);
      return;
    }
    if (j == n_) {
      for (int delta = 1; delta < n_; ++delta)
        if (partial_[delta] != target_) return;
      record();
      return;
    }
    for (int v = 1; v < n_; ++v) {
      if (used_ & (std::uint64_t{1} << v)) continue;
      if (!place(j, v)) continue;
      descend(j + 1);
      unplace(j);
      if (interrupted_) return;
    }
  }

  void record() { found_->push_back(sigma_); }

  int n_;
  Int target_;
  bool prune_;
  const Deadline& deadline_;
  std::atomic<bool>& stop_;
  std::vector<int> sigma_;
  std::uint64_t used_ = 0;
  std::vector<Int> partial_;
  std::vector<Int> remaining_;
  std::vector<std::vector<int>>* found_ = nullptr;
  std::uint64_t nodes_ = 0;
  bool interrupted_ = false;
};

}  // namespace detail

/// All permutations with f(delta) = n(n+1)/3 for every delta. When
/// 3 does not divide n(n+1) the result is empty and exhausted. On timeout the
/// result holds the subtrees completed so far with exhausted = false.
inline EnumerationResult enumerate_perfect(const EnumerationTask& task,
                                           const PermutationConsumer& consumer = {}) {
  if (task.mode != EnumerationMode::PerfectPermutations)
    throw Error(ErrorCode::WrongMode, "enumerate_perfect needs PerfectPermutations mode");
  detail::check_order(task.n);
  if (task.n > kMaxPerfectEnumerationOrder)
    throw Error(ErrorCode::OrderTooLarge, "perfect enumeration supports n <= 63");

  const int n = task.n;
  const detail::Deadline deadline(task.time_limit_seconds);
  EnumerationResult result;
  result.n = n;
  result.mode = task.mode;

  if ((static_cast<Int>(n) * (n + 1)) % 3 != 0) {
    result.exhausted = true;
    result.elapsed_seconds = deadline.elapsed();
    return result;
  }

  // One job per value of sigma(1); n = 1 has a single empty job.
  const int job_count = n == 1 ? 1 : n - 1;
  std::vector<std::vector<std::vector<int>>> per_job(static_cast<std::size_t>(job_count));
  std::vector<char> job_done(static_cast<std::size_t>(job_count), 0);
  std::atomic<bool> stop{false};

  auto worker = [&](int worker_index, int worker_count) {
    for (int job = worker_index; job < job_count; job += worker_count) {
      if (stop.load()) return;
      detail::PerfectSearch search(n, task.prune, deadline, stop);
      if (search.run(job + 1, per_job[job])) job_done[job] = 1;
    }
  };

  const int threads = std::clamp(task.thread_count, 1, job_count);
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
  }

  std::vector<std::vector<int>> canonical;
  for (int job = 0; job < job_count; ++job)
    if (job_done[job])
      canonical.insert(canonical.end(), per_job[job].begin(), per_job[job].end());
  result.exhausted = std::all_of(job_done.begin(), job_done.end(), [](char d) { return d != 0; });
  result.canonical_count = canonical.size();
  result.total_count = result.canonical_count * static_cast<std::uint64_t>(n);

  if (!task.count_only || consumer) {
    std::vector<std::vector<int>> all;
    all.reserve(canonical.size() * static_cast<std::size_t>(n));
    for (const auto& rep : canonical)
      for (int c = 0; c < n; ++c) {
        std::vector<int> rotated(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) rotated[j] = rep[(j + c) % n];
        all.push_back(std::move(rotated));
      }
    std::sort(all.begin(), all.end());
    for (auto& image : all) {
      auto sigma = Permutation::from_image(std::move(image));
      if (consumer) consumer(sigma);
      if (!task.count_only) result.permutations.push_back(std::move(sigma));
    }
  }
  result.elapsed_seconds = deadline.elapsed();
  return result;
}

/// Every Latin square of order n <= 6, in lexicographic order of the
/// row-major cell sequence. No symmetry reduction.
inline EnumerationResult enumerate_latin(const EnumerationTask& task,
                                         const SquareConsumer& consumer = {}) {
  if (task.mode != EnumerationMode::AllLatinSquares)
    throw Error(ErrorCode::WrongMode, "enumerate_latin needs AllLatinSquares mode");
  detail::check_order(task.n);
  if (task.n > kMaxLatinEnumerationOrder)
    throw Error(ErrorCode::OrderTooLarge,
                "Latin square enumeration supports n <= " + std::to_string(kMaxLatinEnumerationOrder));

  const int n = task.n;
  const int cell_count = n * n;
  const detail::Deadline deadline(task.time_limit_seconds);
  EnumerationResult result;
  result.n = n;
  result.mode = task.mode;

  const bool materialize = consumer || !task.count_only;
  std::vector<int> cells(static_cast<std::size_t>(cell_count), -1);
  std::vector<std::uint32_t> row_used(static_cast<std::size_t>(n), 0);
  std::vector<std::uint32_t> col_used(static_cast<std::size_t>(n), 0);
  std::uint64_t nodes = 0;
  bool interrupted = false;

  std::function<void(int)> fill = [&](int cell) {
    if ((++nodes & 0xFFFF) == 0 && deadline.expired()) interrupted = true;
    if (interrupted) return;
    if (cell == cell_count) {
      ++result.total_count;
      if (materialize) {
        auto square = validate_latin(n, cells);
        if (consumer) consumer(square);
        if (!task.count_only) result.squares.push_back(std::move(square));
      }
      return;
    }
    const int r = cell / n;
    const int c = cell % n;
    const std::uint32_t blocked = row_used[r] | col_used[c];
    for (int s = 0; s < n; ++s) {
      const std::uint32_t bit = 1u << s;
      if (blocked & bit) continue;
      cells[cell] = s;
      row_used[r] |= bit;
      col_used[c] |= bit;
      fill(cell + 1);
      row_used[r] &= ~bit;
      col_used[c] &= ~bit;
      if (interrupted) return;
    }
  };
  fill(0);

  result.exhausted = !interrupted;
  result.elapsed_seconds = deadline.elapsed();
  return result;
}

struct ExhaustiveMinimum {
  Int imbalance3;
  LatinSquare witness;  ///< lexicographically smallest square attaining the minimum
};

/// Minimum imbalance3 over every Latin square of order n <= 5.
inline ExhaustiveMinimum min_imbalance_exhaustive(int n) {
  detail::check_order(n);
  if (n > 5) throw Error(ErrorCode::OrderTooLarge, "exhaustive minimum supports n <= 5");
  std::optional<ExhaustiveMinimum> best;
  EnumerationTask task;
  task.n = n;
  task.mode = EnumerationMode::AllLatinSquares;
  enumerate_latin(task, [&](const LatinSquare& square) {
    const Int value = imbalance(square).imbalance3;
    // Squares arrive in lexicographic order, so strict improvement keeps
    // the smallest witness.
    if (!best || value < best->imbalance3) best.emplace(ExhaustiveMinimum{value, square});
  });
  return std::move(*best);
}

}  // namespace latinbal
