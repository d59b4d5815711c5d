#pragma once

// Random Latin squares: a circulant of a random permutation with rows,
// columns and symbols shuffled, then scrambled by cycle switches. A row
// cycle switch between rows r1, r2 exchanges the two rows' entries on a
// column set closed under c -> pos(r1, L[r2][c]); it keeps every row and
// column a bijection. Column switches are the transpose.

#include <latinbal/anneal.hpp>
#include <latinbal/core.hpp>

#include <vector>

namespace latinbal {

/// Mutable row-major cell array that stays Latin under its operations.
class SquareBuilder {
 public:
  explicit SquareBuilder(const LatinSquare& square)
      : n_(square.order()), cells_(square.cells().begin(), square.cells().end()) {}

  int order() const noexcept { return n_; }
  int& at(int r, int c) { return cells_[static_cast<std::size_t>(r) * n_ + c]; }
  int at(int r, int c) const { return cells_[static_cast<std::size_t>(r) * n_ + c]; }

  void switch_row_cycle(int r1, int r2, int start_col) {
    if (r1 == r2) return;
    std::vector<int> pos_r1(static_cast<std::size_t>(n_));
    for (int c = 0; c < n_; ++c) pos_r1[at(r1, c)] = c;
    std::vector<int> cycle;
    int col = start_col;
    do {
      cycle.push_back(col);
      col = pos_r1[at(r2, col)];
    } while (col != start_col);
    for (int c : cycle) std::swap(at(r1, c), at(r2, c));
  }

  void switch_column_cycle(int c1, int c2, int start_row) {
    if (c1 == c2) return;
    std::vector<int> pos_c1(static_cast<std::size_t>(n_));
    for (int r = 0; r < n_; ++r) pos_c1[at(r, c1)] = r;
    std::vector<int> cycle;
    int row = start_row;
    do {
      cycle.push_back(row);
      row = pos_c1[at(row, c2)];
    } while (row != start_row);
    for (int r : cycle) std::swap(at(r, c1), at(r, c2));
  }

  /// One random row or column cycle switch.
  void random_switch(Rng& rng) {
    if (n_ < 2) return;
    const int a = rng.below(n_);
    int b = rng.below(n_ - 1);
    if (b >= a) ++b;
    const int start = rng.below(n_);
    if (rng.below(2) == 0)
      switch_row_cycle(a, b, start);
    else
      switch_column_cycle(a, b, start);
  }

  LatinSquare build() const { return validate_latin(n_, cells_); }

 private:
  int n_;
  std::vector<int> cells_;
};

/// Circulant of a random permutation with rows, columns and symbols
/// independently permuted, followed by `switches` random cycle switches.
inline LatinSquare random_latin_square(int n, Rng& rng, int switches) {
  const LatinSquare base = circulant(random_permutation(n, rng));
  const Permutation rows = random_permutation(n, rng);
  const Permutation cols = random_permutation(n, rng);
  const Permutation symbols = random_permutation(n, rng);
  std::vector<int> cells(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      cells[static_cast<std::size_t>(r) * n + c] = symbols(base.at(rows(r), cols(c)));
  SquareBuilder builder(validate_latin(n, std::move(cells)));
  for (int s = 0; s < switches; ++s) builder.random_switch(rng);
  return builder.build();
}

}  // namespace latinbal
