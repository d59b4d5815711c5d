#pragma once

// Simulated annealing for near-perfect permutations.
//
// Moves are transpositions sigma(p) <-> sigma(q). A transposition changes,
// for each shift delta, only the terms of f(delta) indexed by
// j in {p, q, p - delta, q - delta} (mod n), so a move is evaluated in O(n).
// Since f(delta) = f(n - delta), only delta <= n/2 is recomputed and the
// result mirrored.

#include <latinbal/core.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace latinbal {

// ---------------------------------------------------------------------------
// Random numbers

/// Identifier recorded in certificates. mt19937_64 output is fixed by the
/// standard; bounded integers and reals are derived here rather than through
/// std distributions, whose algorithms are implementation-defined.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound), bound > 0. Rejection sampling on the top of the range.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = engine_(); while (x >= limit);
    return x % bound;
  }

  int below(int bound) { return static_cast<int>(below(static_cast<std::uint64_t>(bound))); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(static_cast<std::uint64_t>(i)));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replica `index`. Replica 0 runs on the base seed itself, so a
/// single-threaded run with the recorded seed reproduces any certificate.
inline std::uint64_t replica_seed(std::uint64_t base, int index) {
  return index == 0 ? base : splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(index)));
}

inline Permutation random_permutation(int n, Rng& rng) {
  std::vector<int> image(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) image[j] = j;
  rng.shuffle(image);
  return Permutation::from_image(std::move(image));
}

// ---------------------------------------------------------------------------
// Objective

inline Int band_penalty(Int value, Int a) noexcept {
  if (value < a) return a - value;
  if (value > a + 2) return value - (a + 2);
  return 0;
}

/// Total distance of the profile from the band {a, a+2}; zero iff near-perfect.
inline Int objective(const ShiftProfile& profile, const BandParameters& params) {
  if (profile.n != params.n)
    throw Error(ErrorCode::DimensionMismatch, "profile order differs from band order");
  Int energy = 0;
  for (Int v : profile.values) energy += band_penalty(v, params.a);
  return energy;
}

// ---------------------------------------------------------------------------
// State

struct SwapDelta {
  Int new_energy = 0;
  /// (delta, new f(delta)) for every shift whose value changes.
  std::vector<std::pair<int, Int>> touched;
};

class AnnealState {
 public:
  AnnealState(const Permutation& sigma, const BandParameters& params)
      : params_(params),
        sigma_(sigma.image().begin(), sigma.image().end()),
        profile_(shift_profile(sigma)),
        energy_(objective(profile_, params_)),
        best_energy_(energy_) {
    if (sigma.order() != params.n)
      throw Error(ErrorCode::DimensionMismatch, "permutation order differs from band order");
    rewrap();
  }

  int order() const noexcept { return params_.n; }
  const BandParameters& params() const noexcept { return params_; }
  Permutation permutation() const { return Permutation::from_image(sigma_); }
  std::span<const int> image() const noexcept { return sigma_; }
  /// Position holding value v, i.e. sigma^{-1}(v).
  int position_of(int v) const noexcept { return position_[static_cast<std::size_t>(v)]; }
  const ShiftProfile& profile() const noexcept { return profile_; }
  Int energy() const noexcept { return energy_; }
  Int best_energy() const noexcept { return best_energy_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  int restart_count() const noexcept { return restarts_; }

  /// Energy after swapping positions p and q. Does not modify the state.
  Int evaluate_swap(int p, int q) const {
    return scan_swap(p, q, [](int, Int) {});
  }

  /// As evaluate_swap, also listing (delta, new f(delta)) for every changed shift.
  Int evaluate_swap(int p, int q, std::vector<std::pair<int, Int>>& touched) const {
    const int n = params_.n;
    touched.clear();
    return scan_swap(p, q, [&](int delta, Int value) {
      touched.emplace_back(delta, value);
      if (2 * delta != n) touched.emplace_back(n - delta, value);
    });
  }

  /// Swaps positions p and q, updating profile and energy incrementally.
  void apply_swap(int p, int q) {
    const int n = params_.n;
    std::vector<std::pair<int, Int>>& changed = scratch_;
    changed.clear();
    energy_ = scan_swap(p, q, [&](int delta, Int value) { changed.emplace_back(delta, value); });
    for (const auto& [delta, value] : changed) {
      profile_.values[static_cast<std::size_t>(delta - 1)] = value;
      profile_.values[static_cast<std::size_t>(n - delta - 1)] = value;
    }
    std::swap(sigma_[p], sigma_[q]);
    position_[static_cast<std::size_t>(sigma_[p])] = p;
    position_[static_cast<std::size_t>(sigma_[q])] = q;
    for (int copy = 0; copy < 3; ++copy) {
      wrapped_[copy * n + p] = sigma_[p];
      wrapped_[copy * n + q] = sigma_[q];
    }
    if (energy_ < best_energy_) best_energy_ = energy_;
  }

  /// Replaces the permutation, keeping the global best energy and counters.
  void restart(const Permutation& sigma) {
    sigma_.assign(sigma.image().begin(), sigma.image().end());
    rewrap();
    profile_ = shift_profile(sigma);
    energy_ = objective(profile_, params_);
    if (energy_ < best_energy_) best_energy_ = energy_;
    ++restarts_;
  }

  void count_step() noexcept { ++steps_; }

 private:
  void rewrap() {
    const auto n = sigma_.size();
    position_.resize(n);
    for (std::size_t j = 0; j < n; ++j) position_[static_cast<std::size_t>(sigma_[j])] = static_cast<int>(j);
    wrapped_.resize(3 * n);
    for (std::size_t copy = 0; copy < 3; ++copy)
      std::copy(sigma_.begin(), sigma_.end(), wrapped_.begin() + static_cast<std::ptrdiff_t>(copy * n));
  }

  // Energy after the swap; reports each changed shift delta <= n/2 with its
  // new value (f(n - delta) takes the same value).
  template <typename OnChange>
  Int scan_swap(int p, int q, OnChange&& on_change) const {
    const int n = params_.n;
    const int vp = sigma_[p];
    const int vq = sigma_[q];
    // The affected indices p, q, p - delta, q - delta are distinct unless
    // delta = +-(q - p) mod n.
    const int gap = q > p ? q - p : q - p + n;
    const int* w = wrapped_.data() + n;  // w[i] = sigma(i mod n) for i in [-n, 2n)
    const Int a = params_.a;

    Int energy = energy_;
    for (int delta = 1; 2 * delta <= n; ++delta) {
      Int change;
      if (delta != gap && delta != n - gap) {
        const int a1 = w[p + delta], b1 = w[p - delta];
        const int a2 = w[q + delta], b2 = w[q - delta];
        change = std::abs(a1 - vq) + std::abs(vq - b1) + std::abs(a2 - vp) + std::abs(vp - b2) -
                 std::abs(a1 - vp) - std::abs(vp - b1) - std::abs(a2 - vq) - std::abs(vq - b2);
      } else {
        change = coincident_change(p, q, delta);
      }
      if (change == 0) continue;

      const Int old_value = profile_.values[static_cast<std::size_t>(delta - 1)];
      const Int new_value = old_value + change;
      const Int mult = 2 * delta == n ? 1 : 2;
      energy += mult * (band_penalty(new_value, a) - band_penalty(old_value, a));
      on_change(delta, new_value);
    }
    return energy;
  }

  // Sum of term changes at shift delta when some of the affected indices coincide.
  Int coincident_change(int p, int q, int delta) const {
    const int n = params_.n;
    const int vp = sigma_[p];
    const int vq = sigma_[q];
    auto swapped = [&](int i) { return i == p ? vq : i == q ? vp : sigma_[i]; };
    int idx[4];
    int count = 0;
    auto add = [&](int j) {
      for (int k = 0; k < count; ++k)
        if (idx[k] == j) return;
      idx[count++] = j;
    };
    add(p);
    add(q);
    add(p >= delta ? p - delta : p - delta + n);
    add(q >= delta ? q - delta : q - delta + n);
    Int change = 0;
    for (int k = 0; k < count; ++k) {
      const int j = idx[k];
      const int next = j + delta < n ? j + delta : j + delta - n;
      change += std::abs(swapped(next) - swapped(j)) - std::abs(sigma_[next] - sigma_[j]);
    }
    return change;
  }

  BandParameters params_;
  std::vector<int> sigma_;
  std::vector<int> wrapped_;  ///< three consecutive copies of sigma_
  std::vector<int> position_;  ///< inverse of sigma_
  ShiftProfile profile_;
  Int energy_;
  Int best_energy_;
  std::uint64_t steps_ = 0;
  int restarts_ = 0;
  std::vector<std::pair<int, Int>> scratch_;
};

inline SwapDelta swap_delta(const AnnealState& state, int p, int q) {
  const int n = state.order();
  if (p < 0 || p >= n || q < 0 || q >= n)
    throw Error(ErrorCode::IndexOutOfRange,
                "swap (" + std::to_string(p) + ", " + std::to_string(q) + ")");
  if (p == q) throw Error(ErrorCode::IdenticalIndices, "swap needs two distinct positions");
  SwapDelta result;
  result.new_energy = state.evaluate_swap(p, q, result.touched);
  return result;
}

// ---------------------------------------------------------------------------
// Search

struct AnnealConfig {
  int n = 4;
  std::uint64_t seed = 1;
  double initial_temperature = 4.0;
  double cooling_factor = 0.99997;
  int steps_per_temperature = 0;     ///< <= 0 means the default, 100 n
  int restart_limit = 1000000;
  int stagnation_window = 20000;  ///< temperature levels without improvement before a restart
  std::optional<double> time_limit_seconds;
  int thread_count = 1;
  /// Probability that a move swaps the positions of two consecutive values
  /// v, v+1 instead of two uniformly chosen positions.
  double value_neighbor_fraction = 0.5;
  /// Recompute the profile from scratch every this many steps and compare
  /// (0 disables). Mismatches throw InvariantViolation.
  std::uint64_t verify_every = 0;
};

struct NearPPCertificate {
  int n = 0;
  Permutation sigma = Permutation::identity(1);
  std::vector<Int> profile;  ///< claimed f(1..n-1)
  Int imbalance3 = 0;        ///< claimed imbalance3 of circulant(sigma)
  std::uint64_t seed = 0;    ///< reproduces the certificate with thread_count = 1
  std::string rng = std::string(kRngAlgorithm);
  double elapsed_seconds = 0.0;
  std::uint64_t steps = 0;
  int restarts = 0;

  friend bool operator==(const NearPPCertificate&, const NearPPCertificate&) = default;
};

enum class FailureReason { TimeLimitExceeded, RestartLimitReached };

struct SearchFailure {
  FailureReason reason = FailureReason::TimeLimitExceeded;
  Int best_energy = 0;
  int restarts = 0;
  std::uint64_t steps = 0;
  double elapsed_seconds = 0.0;
};

using SearchOutcome = std::variant<NearPPCertificate, SearchFailure>;

namespace detail {

struct ReplicaResult {
  bool found = false;
  bool stopped = false;  ///< halted by another replica's success
  FailureReason reason = FailureReason::TimeLimitExceeded;
  AnnealState state;
};

inline void check_profile(const AnnealState& state) {
  const auto fresh = shift_profile(state.permutation());
  if (!(fresh == state.profile()))
    throw Error(ErrorCode::InvariantViolation, "incremental profile diverged from recomputation");
  for (Int v : state.profile().values)
    if (v % 2 != 0) throw Error(ErrorCode::InvariantViolation, "odd shift correlation");
}

inline ReplicaResult run_replica(const AnnealConfig& config, const BandParameters& params,
                                 std::uint64_t seed, const std::atomic<bool>& found,
                                 std::chrono::steady_clock::time_point start) {
  const int n = config.n;
  const double t0 = config.initial_temperature > 0 ? config.initial_temperature : AnnealConfig{}.initial_temperature;
  const int steps_per_level =
      config.steps_per_temperature > 0 ? config.steps_per_temperature : 100 * n;

  Rng rng(seed);
  ReplicaResult out{false, false, FailureReason::TimeLimitExceeded,
                    AnnealState(random_permutation(n, rng), params)};
  AnnealState& state = out.state;
  if (state.energy() == 0) {
    out.found = true;
    return out;
  }

  double temperature = t0;
  // exp(-change / T) for small uphill changes, refreshed once per level.
  std::vector<double> acceptance(static_cast<std::size_t>(8 * n + 1));
  auto refresh_acceptance = [&] {
    for (std::size_t c = 0; c < acceptance.size(); ++c)
      acceptance[c] = std::exp(-static_cast<double>(c) / temperature);
  };
  refresh_acceptance();
  Int run_best = state.energy();
  int stale_levels = 0;

  for (;;) {
    for (int s = 0; s < steps_per_level; ++s) {
      int p;
      int q;
      if (config.value_neighbor_fraction > 0.0 && rng.uniform01() < config.value_neighbor_fraction) {
        const int v = rng.below(n - 1);
        p = state.position_of(v);
        q = state.position_of(v + 1);
      } else {
        p = rng.below(n);
        q = rng.below(n - 1);
        if (q >= p) ++q;
      }
      const Int next = state.evaluate_swap(p, q);
      const Int change = next - state.energy();
      state.count_step();
      const double threshold = change <= 0 ? 1.0
                               : change < static_cast<Int>(acceptance.size())
                                   ? acceptance[static_cast<std::size_t>(change)]
                                   : std::exp(-static_cast<double>(change) / temperature);
      if (change <= 0 || rng.uniform01() < threshold) {
        state.apply_swap(p, q);
        if (config.verify_every && state.step_count() % config.verify_every == 0)
          check_profile(state);
        if (next == 0) {
          out.found = true;
          return out;
        }
      }
    }

    if (state.energy() < run_best) {
      run_best = state.energy();
      stale_levels = 0;
    } else {
      ++stale_levels;
    }
    temperature *= config.cooling_factor;
    refresh_acceptance();

    if (found.load(std::memory_order_relaxed)) {
      out.stopped = true;
      return out;
    }
    if (config.time_limit_seconds &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >=
            *config.time_limit_seconds) {
      out.reason = FailureReason::TimeLimitExceeded;
      return out;
    }
    if (stale_levels >= config.stagnation_window) {
      if (state.restart_count() >= config.restart_limit) {
        out.reason = FailureReason::RestartLimitReached;
        return out;
      }
      state.restart(random_permutation(n, rng));
      if (state.energy() == 0) {
        out.found = true;
        return out;
      }
      temperature = t0;
      refresh_acceptance();
      run_best = state.energy();
      stale_levels = 0;
    }
  }
}

}  // namespace detail

/// Searches for a near-perfect permutation of order n = 1 (mod 3), n >= 4.
/// Deterministic for a fixed config when thread_count = 1.
inline SearchOutcome search(const AnnealConfig& config) {
  const BandParameters params = band_parameters(config.n);
  if (!(config.cooling_factor > 0.0 && config.cooling_factor < 1.0))
    throw Error(ErrorCode::InvariantViolation, "cooling factor must lie strictly between 0 and 1");

  const auto start = std::chrono::steady_clock::now();
  const int replicas = std::max(1, config.thread_count);
  std::atomic<bool> found{false};
  std::mutex winner_mutex;
  std::optional<std::pair<int, detail::ReplicaResult>> winner;
  std::vector<std::optional<detail::ReplicaResult>> results(static_cast<std::size_t>(replicas));

  auto run = [&](int index) {
    auto result = detail::run_replica(config, params, replica_seed(config.seed, index), found, start);
    if (result.found) {
      std::lock_guard lock(winner_mutex);
      if (!winner) {
        found.store(true);
        winner.emplace(index, result);
      }
    }
    results[static_cast<std::size_t>(index)] = std::move(result);
  };

  if (replicas == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (int r = 0; r < replicas; ++r) pool.emplace_back(run, r);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (winner) {
    const auto& state = winner->second.state;
    NearPPCertificate cert;
    cert.n = config.n;
    cert.sigma = state.permutation();
    cert.profile = state.profile().values;
    cert.imbalance3 = imbalance(circulant(cert.sigma)).imbalance3;
    cert.seed = replica_seed(config.seed, winner->first);
    cert.elapsed_seconds = elapsed;
    cert.steps = state.step_count();
    cert.restarts = state.restart_count();
    return cert;
  }

  SearchFailure failure;
  failure.elapsed_seconds = elapsed;
  failure.best_energy = std::numeric_limits<Int>::max();
  for (const auto& r : results) {
    if (!r) continue;
    failure.reason = r->reason;
    failure.best_energy = std::min(failure.best_energy, r->state.best_energy());
    failure.restarts += r->state.restart_count();
    failure.steps += r->state.step_count();
  }
  return failure;
}

}  // namespace latinbal
