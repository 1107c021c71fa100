#pragma once

// 2-blocks and the 2-block form of a circulant of order 4n.
//
// A TwoBlock is [[d, o], [o, d]] with d, o in {+1, -1}; it is even when
// d == o and odd when d == -o. Pairing row r with row r + 2n and column c
// with column c + 2n turns the circulant with first row h (length 4n) into a
// 2n x 2n matrix of 2-blocks whose first block row is
//
//   M_d = [[h[d], h[d + 2n]], [h[d + 2n], h[d]]],   d = 0 .. 2n-1.
//
// Block (r, c) of the reordered matrix is M_{c-r} for c >= r. For c < r it is
// M_{c-r+2n} with diagonal and off-diagonal exchanged; that has the same
// parity and is identical when the block is even.
//
// Any other block labelling that differs by a relabelling of block indices
// leaves everything downstream unchanged.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "circhad/error.hpp"
#include "circhad/seqcore.hpp"

namespace circhad {

enum class Parity { even, odd };

inline const char* to_string(Parity p) noexcept { return p == Parity::even ? "Even" : "Odd"; }

struct TwoBlock {
  Sign diag = Sign::plus;
  Sign offdiag = Sign::plus;

  friend bool operator==(const TwoBlock&, const TwoBlock&) = default;
};

constexpr Parity parity(TwoBlock b) noexcept { return b.diag == b.offdiag ? Parity::even : Parity::odd; }
constexpr bool is_even(TwoBlock b) noexcept { return parity(b) == Parity::even; }

/// Integer matrix [[diag, off], [off, diag]]. Sums and products of 2-blocks
/// stay in this family, so two numbers describe it exactly.
struct SymBlockMatrix {
  std::int64_t diag = 0;
  std::int64_t off = 0;

  bool is_zero() const noexcept { return diag == 0 && off == 0; }

  std::array<std::array<std::int64_t, 2>, 2> rows() const noexcept { return {{{diag, off}, {off, diag}}}; }

  SymBlockMatrix& operator+=(const SymBlockMatrix& o) noexcept {
    diag += o.diag;
    off += o.off;
    return *this;
  }
  friend SymBlockMatrix operator+(SymBlockMatrix a, const SymBlockMatrix& b) noexcept { return a += b; }
  friend SymBlockMatrix operator-(const SymBlockMatrix& a) noexcept { return {-a.diag, -a.off}; }
  friend bool operator==(const SymBlockMatrix&, const SymBlockMatrix&) = default;
};

/// Exact product a * b. For two even blocks this is 2 s J with s = a.diag * b.diag.
constexpr SymBlockMatrix block_product(TwoBlock a, TwoBlock b) noexcept {
  const int i = value(a.diag), j = value(a.offdiag);
  const int k = value(b.diag), l = value(b.offdiag);
  return {i * k + j * l, i * l + j * k};
}

class BlockSequence {
 public:
  explicit BlockSequence(std::vector<TwoBlock> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.size() < 2 || blocks_.size() % 2 != 0)
      throw usage_error("block sequence length must be even and at least 2, got " + std::to_string(blocks_.size()));
  }

  /// Comma-separated pairs "do", e.g. "++,+-,--". Whitespace around pairs is ignored.
  static BlockSequence parse(std::string_view text) {
    std::vector<TwoBlock> blocks;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t comma = text.find(',', pos);
      if (comma == std::string_view::npos) comma = text.size();
      std::string_view item = text.substr(pos, comma - pos);
      while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
      while (!item.empty() && (item.back() == ' ' || item.back() == '\t' || item.back() == '\r')) item.remove_suffix(1);
      if (item.size() != 2)
        throw usage_error("block " + std::to_string(blocks.size()) + " must be two signs, got '" + std::string(item) + "'");
      blocks.push_back({sign_from_char(item[0]), sign_from_char(item[1])});
      pos = comma + 1;
    }
    return BlockSequence(std::move(blocks));
  }

  std::size_t size() const noexcept { return blocks_.size(); }
  /// Half the length; a sequence of 2n blocks has n() == n.
  std::size_t n() const noexcept { return blocks_.size() / 2; }
  const TwoBlock& operator[](std::size_t i) const noexcept { return blocks_[i]; }
  /// Cyclic access modulo 2n.
  const TwoBlock& at(std::int64_t i) const noexcept { return blocks_[reduce_index(i, blocks_.size())]; }
  const std::vector<TwoBlock>& blocks() const noexcept { return blocks_; }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      if (i) s.push_back(',');
      s.push_back(to_char(blocks_[i].diag));
      s.push_back(to_char(blocks_[i].offdiag));
    }
    return s;
  }

  friend bool operator==(const BlockSequence&, const BlockSequence&) = default;

 private:
  std::vector<TwoBlock> blocks_;
};

inline BlockSequence block_decompose(const SignSequence& h) {
  if (h.size() % 4 != 0)
    throw usage_error("block decomposition needs a length divisible by 4, got " + std::to_string(h.size()));
  const std::size_t half = h.size() / 2;
  std::vector<TwoBlock> blocks(half);
  for (std::size_t d = 0; d < half; ++d) blocks[d] = {h[d], h[d + half]};
  return BlockSequence(std::move(blocks));
}

/// Inverse of block_decompose: h[d] = M_d.diag, h[d + 2n] = M_d.offdiag.
inline SignSequence block_recompose(const BlockSequence& bs) {
  const std::size_t half = bs.size();
  std::vector<Sign> h(2 * half);
  for (std::size_t d = 0; d < half; ++d) {
    h[d] = bs[d].diag;
    h[d + half] = bs[d].offdiag;
  }
  return SignSequence(std::move(h));
}

inline std::size_t even_count(const BlockSequence& bs) noexcept {
  std::size_t count = 0;
  for (const TwoBlock& b : bs.blocks()) count += is_even(b) ? 1 : 0;
  return count;
}

inline std::vector<std::size_t> even_indices(const BlockSequence& bs) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bs.size(); ++i)
    if (is_even(bs[i])) out.push_back(i);
  return out;
}

inline std::size_t checked_lag(const BlockSequence& bs, std::int64_t u) {
  if (u < 1 || u >= static_cast<std::int64_t>(bs.size()))
    throw usage_error("lag " + std::to_string(u) + " out of range 1.." + std::to_string(bs.size() - 1));
  return static_cast<std::size_t>(u);
}

/// Sum of M_i M_{i+u} over the i where both blocks are even. Empty sums are zero.
inline SymBlockMatrix eqn1_residual(const BlockSequence& bs, std::int64_t u) {
  const std::size_t lag = checked_lag(bs, u);
  SymBlockMatrix acc;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const TwoBlock& a = bs[i];
    const TwoBlock& b = bs.at(static_cast<std::int64_t>(i + lag));
    if (is_even(a) && is_even(b)) acc += block_product(a, b);
  }
  return acc;
}

inline bool eqn1_holds(const BlockSequence& bs) {
  for (std::size_t u = 1; u < bs.size(); ++u)
    if (!eqn1_residual(bs, static_cast<std::int64_t>(u)).is_zero()) return false;
  return true;
}

/// An even block M_i is symmetric when M_{i+n} is even too.
inline bool is_symmetric_even(const BlockSequence& bs, std::int64_t i) {
  if (i < 0 || i >= static_cast<std::int64_t>(bs.size()))
    throw usage_error("block index " + std::to_string(i) + " out of range");
  if (!is_even(bs.at(i))) throw usage_error("block " + std::to_string(i) + " is odd; symmetry is defined for even blocks only");
  return is_even(bs.at(i + static_cast<std::int64_t>(bs.n())));
}

}  // namespace circhad
