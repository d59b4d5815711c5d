#pragma once

// Exact combinatorial primitives for Latin square imbalance.
//
// All quantities are integers. The imbalance I(L) is carried as
// imbalance3 = 3 * I(L) so that no rational or floating-point value ever
// appears; `format_thirds` renders it as a reduced fraction for display.

#include <latinbal/error.hpp>

#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

namespace latinbal {

using Int = std::int64_t;

/// Largest order accepted anywhere. imbalance3 < n^4 keeps every sum inside
/// 64 bits below this.
inline constexpr int kMaxOrder = 10000;

namespace detail {

inline void check_order(long long n) {
  if (n < 1) throw Error(ErrorCode::OrderTooSmall, "order must be at least 1");
  if (n > kMaxOrder)
    throw Error(ErrorCode::OrderTooLarge,
                "order " + std::to_string(n) + " exceeds " + std::to_string(kMaxOrder));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Permutation

/// A bijection on {0..n-1}; `image()[j]` is sigma(j).
class Permutation {
 public:
  /// Throws NotABijection (index = first offending position) when `image`
  /// repeats or leaves {0..n-1}.
  static Permutation from_image(std::vector<int> image) {
    detail::check_order(static_cast<long long>(image.size()));
    const auto n = image.size();
    std::vector<char> seen(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const int v = image[j];
      if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v])
        throw Error(ErrorCode::NotABijection,
                    "value " + std::to_string(v) + " at position " + std::to_string(j), j);
      seen[v] = 1;
    }
    return Permutation(std::move(image));
  }

  static Permutation identity(int n) {
    detail::check_order(n);
    std::vector<int> image(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) image[j] = j;
    return Permutation(std::move(image));
  }

  int order() const noexcept { return static_cast<int>(image_.size()); }
  int operator()(int j) const noexcept { return image_[static_cast<std::size_t>(j)]; }
  std::span<const int> image() const noexcept { return image_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  explicit Permutation(std::vector<int> image) : image_(std::move(image)) {}
  std::vector<int> image_;
};

inline Permutation invert(const Permutation& sigma) {
  std::vector<int> inverse(static_cast<std::size_t>(sigma.order()));
  for (int j = 0; j < sigma.order(); ++j) inverse[sigma(j)] = j;
  return Permutation::from_image(std::move(inverse));
}

// ---------------------------------------------------------------------------
// LatinSquare

/// Validated n x n Latin square. Stores the cells row-major together with
/// the inverse lookup pos(r, s) = column of symbol s in row r.
class LatinSquare {
 public:
  int order() const noexcept { return n_; }
  int at(int row, int col) const noexcept { return cells_[index(row, col)]; }
  int pos(int row, int symbol) const noexcept { return pos_[index(row, symbol)]; }

  /// Row-major cells, n*n entries.
  std::span<const int> cells() const noexcept { return cells_; }

  std::vector<std::vector<int>> rows() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_));
    for (int r = 0; r < n_; ++r)
      out[r].assign(cells_.begin() + index(r, 0), cells_.begin() + index(r, 0) + n_);
    return out;
  }

  friend bool operator==(const LatinSquare& a, const LatinSquare& b) {
    return a.n_ == b.n_ && a.cells_ == b.cells_;
  }

  friend LatinSquare validate_latin(int n, std::vector<int> cells);

 private:
  LatinSquare(int n, std::vector<int> cells, std::vector<int> pos)
      : n_(n), cells_(std::move(cells)), pos_(std::move(pos)) {}

  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(c);
  }

  int n_;
  std::vector<int> cells_;
  std::vector<int> pos_;
};

/// Validates row-major `cells` of an n x n array. Checks every row and every
/// column; reports the first violation found in the order symbols, rows,
/// columns.
inline LatinSquare validate_latin(int n, std::vector<int> cells) {
  detail::check_order(n);
  const auto un = static_cast<std::size_t>(n);
  if (cells.size() != un * un)
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(un * un) + " cells, got " +
                    std::to_string(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i] < 0 || cells[i] >= n)
      throw Error(ErrorCode::SymbolOutOfRange,
                  "symbol " + std::to_string(cells[i]) + " at row " + std::to_string(i / un) +
                      ", column " + std::to_string(i % un),
                  i / un);

  std::vector<int> pos(un * un, -1);
  for (std::size_t r = 0; r < un; ++r)
    for (std::size_t c = 0; c < un; ++c) {
      auto& slot = pos[r * un + static_cast<std::size_t>(cells[r * un + c])];
      if (slot != -1)
        throw Error(ErrorCode::RowViolation, "row " + std::to_string(r) + " repeats a symbol", r);
      slot = static_cast<int>(c);
    }

  std::vector<char> seen(un);
  for (std::size_t c = 0; c < un; ++c) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t r = 0; r < un; ++r) {
      auto& flag = seen[static_cast<std::size_t>(cells[r * un + c])];
      if (flag)
        throw Error(ErrorCode::ColumnViolation,
                    "column " + std::to_string(c) + " repeats a symbol", c);
      flag = 1;
    }
  }
  return LatinSquare(n, std::move(cells), std::move(pos));
}

/// Nested-row overload. Throws DimensionMismatch for ragged or non-square input.
inline LatinSquare validate_latin(const std::vector<std::vector<int>>& rows) {
  const auto n = rows.size();
  if (n == 0) throw Error(ErrorCode::OrderTooSmall, "empty array");
  std::vector<int> flat;
  flat.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n)
      throw Error(ErrorCode::DimensionMismatch,
                  "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                      " entries, expected " + std::to_string(n),
                  r);
    flat.insert(flat.end(), rows[r].begin(), rows[r].end());
  }
  if (n > static_cast<std::size_t>(kMaxOrder))
    throw Error(ErrorCode::OrderTooLarge, "order " + std::to_string(n));
  return validate_latin(static_cast<int>(n), std::move(flat));
}

// ---------------------------------------------------------------------------
// Closed forms

inline constexpr Int pair_count(Int n) noexcept { return n * (n - 1) / 2; }

/// Sum of all row-pair distances of any Latin square of order n.
inline constexpr Int fixed_distance_sum(Int n) noexcept { return n * n * (n * n - 1) / 6; }

/// Sum of f_sigma(delta) over delta = 1..n-1, for any permutation of order n.
inline constexpr Int profile_total(Int n) noexcept { return n * (n * n - 1) / 3; }

inline constexpr bool is_one_mod_three(Int n) noexcept { return n % 3 == 1; }

/// 3 * (4n(n-1)/9) = 4n(n-1)/3. Throws WrongResidue unless n = 1 (mod 3).
inline Int lower_bound3(Int n) {
  if (!is_one_mod_three(n))
    throw Error(ErrorCode::WrongResidue, "n = " + std::to_string(n) + " is not 1 mod 3");
  return 4 * n * (n - 1) / 3;
}

struct BandParameters {
  int n;
  Int a;  ///< lower band value (n(n+1) - 2) / 3 = 3k(k+1)
  Int k;  ///< (n - 1) / 3; also the number of profile entries equal to a + 2
};

inline BandParameters band_parameters(int n) {
  if (!is_one_mod_three(n))
    throw Error(ErrorCode::WrongResidue, "n = " + std::to_string(n) + " is not 1 mod 3");
  if (n < 4) throw Error(ErrorCode::OrderTooSmall, "band parameters need n >= 4");
  const Int nn = n;
  return BandParameters{n, (nn * (nn + 1) - 2) / 3, (nn - 1) / 3};
}

/// Renders x/3 as a reduced fraction: "16/3", "40", "0".
inline std::string format_thirds(Int imbalance3) {
  if (imbalance3 % 3 == 0) return std::to_string(imbalance3 / 3);
  return std::to_string(imbalance3) + "/3";
}

// ---------------------------------------------------------------------------
// Distances and imbalance

inline Int row_distance(const LatinSquare& square, int r1, int r2) {
  const int n = square.order();
  if (r1 < 0 || r1 >= n || r2 < 0 || r2 >= n)
    throw Error(ErrorCode::IndexOutOfRange,
                "row pair (" + std::to_string(r1) + ", " + std::to_string(r2) + ")");
  Int d = 0;
  for (int s = 0; s < n; ++s) d += std::abs(square.pos(r1, s) - square.pos(r2, s));
  return d;
}

struct ImbalanceReport {
  int n = 0;
  Int imbalance3 = 0;
  Int pair_count = 0;
  Int distance_sum = 0;
  bool all_even = true;
  Int lower_bound3 = 0;  ///< 0 unless n = 1 (mod 3)
  Int gap3 = 0;          ///< imbalance3 - lower_bound3

  std::string imbalance() const { return format_thirds(imbalance3); }
};

inline ImbalanceReport imbalance(const LatinSquare& square) {
  const int n = square.order();
  const Int ideal3 = static_cast<Int>(n) * (n + 1);
  ImbalanceReport report;
  report.n = n;
  report.pair_count = pair_count(n);
  for (int r1 = 0; r1 < n; ++r1)
    for (int r2 = r1 + 1; r2 < n; ++r2) {
      const Int d = row_distance(square, r1, r2);
      report.distance_sum += d;
      report.all_even = report.all_even && d % 2 == 0;
      report.imbalance3 += std::abs(3 * d - ideal3);
    }
  report.lower_bound3 = is_one_mod_three(n) ? lower_bound3(n) : 0;
  report.gap3 = report.imbalance3 - report.lower_bound3;
  return report;
}

// ---------------------------------------------------------------------------
// Shift correlations

/// f_sigma(1..n-1). `values[delta - 1]` is the correlation at shift delta.
struct ShiftProfile {
  int n = 0;
  std::vector<Int> values;

  Int at(int delta) const { return values.at(static_cast<std::size_t>(delta - 1)); }
  friend bool operator==(const ShiftProfile&, const ShiftProfile&) = default;
};

/// f(delta) = sum_j |sigma((j + delta) mod n) - sigma(j)|. Only the index
/// wraps; values are compared as plain integers.
inline ShiftProfile shift_profile(const Permutation& sigma) {
  const int n = sigma.order();
  if (n < 2) throw Error(ErrorCode::OrderTooSmall, "shift profile needs n >= 2");
  ShiftProfile profile{n, std::vector<Int>(static_cast<std::size_t>(n - 1), 0)};
  for (int delta = 1; delta < n; ++delta) {
    Int f = 0;
    for (int j = 0; j < n; ++j) {
      const int next = j + delta < n ? j + delta : j + delta - n;
      f += std::abs(sigma(next) - sigma(j));
    }
    profile.values[static_cast<std::size_t>(delta - 1)] = f;
  }
  return profile;
}

/// L[i][j] = (i + sigma^{-1}(j)) mod n. Row pairs at offset delta are at
/// distance f_sigma(delta).
inline LatinSquare circulant(const Permutation& sigma) {
  const int n = sigma.order();
  const Permutation tau = invert(sigma);
  std::vector<int> cells(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cells[static_cast<std::size_t>(i) * n + j] = (i + tau(j)) % n;
  return validate_latin(n, std::move(cells));
}

enum class Classification { Perfect, NearPerfect, Neither };

constexpr std::string_view to_string(Classification c) noexcept {
  switch (c) {
    case Classification::Perfect: return "Perfect";
    case Classification::NearPerfect: return "NearPerfect";
    case Classification::Neither: return "Neither";
  }
  return "Neither";
}

inline Classification classify(const ShiftProfile& profile) {
  const Int n = profile.n;
  if ((n * (n + 1)) % 3 == 0) {
    const Int target = n * (n + 1) / 3;
    for (Int v : profile.values)
      if (v != target) return Classification::Neither;
    return Classification::Perfect;
  }
  if (n < 4) return Classification::Neither;
  const Int a = band_parameters(static_cast<int>(n)).a;
  for (Int v : profile.values)
    if (v != a && v != a + 2) return Classification::Neither;
  return Classification::NearPerfect;
}

inline Classification classify(const Permutation& sigma) { return classify(shift_profile(sigma)); }

}  // namespace latinbal
