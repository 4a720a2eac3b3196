#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etsym/construction.hpp"
#include "etsym/fpgroup.hpp"

namespace etsym {

// Nonnegative integer with an absorbing infinity.
struct ExtInt {
  std::uint64_t v = 0;
  bool inf = false;

  static ExtInt infinity() { return {0, true}; }
  static ExtInt of(std::uint64_t x) { return {x, false}; }

  bool is_finite() const { return !inf; }
  ExtInt operator+(const ExtInt& o) const {
    if (inf || o.inf) return infinity();
    return of(v + o.v);
  }
  ExtInt operator*(std::uint64_t c) const {
    if (inf) return infinity();
    return of(v * c);
  }
  bool operator==(const ExtInt& o) const { return inf == o.inf && (inf || v == o.v); }
  bool operator!=(const ExtInt& o) const { return !(*this == o); }
  bool operator<=(const ExtInt& o) const {
    if (o.inf) return true;
    if (inf) return false;
    return v <= o.v;
  }
  std::string str() const { return inf ? "inf" : std::to_string(v); }
};

ExtInt ext_max(const ExtInt& a, const ExtInt& b);

// Per-degree symbol-length suprema M_m of a block class, m >= 1, with a
// constant tail; M_0 = 0 by convention and M_1 is clamped to >= 1.
class BoundTable {
 public:
  BoundTable() = default;
  BoundTable(std::vector<ExtInt> values, ExtInt tail);

  // m = 0 gives 0; beyond the explicit list, the tail value.
  ExtInt value(unsigned m) const;
  bool m1_was_clamped() const { return m1_clamped_; }
  std::size_t explicit_size() const { return values_.size(); }

  // Pointwise supremum of per-block tables.
  static BoundTable sup(const std::vector<BoundTable>& tables);
  // The table (1, 1, 0, 0, ...) of the standard blocks, or all ones when the
  // order-2 sign block is included (p = 2 only).
  static BoundTable standard(std::uint64_t p, bool include_sign_block);
  // Table of a single block kind.
  static BoundTable of_block(const BlockSpec& b);
  // Supremum over the blocks appearing in a construction.
  static BoundTable of_construction(const Construction& c);

 private:
  void clamp_m1();
  std::vector<ExtInt> values_; // M_1, M_2, ...
  ExtInt tail_ = ExtInt::of(0);
  bool m1_clamped_ = false;
};

// f(e, m) = sum_{k=0}^{min(e,m)} C(e, k) M_{m-k}, the closed form of the
// recursion f(e, m) = f(e-1, m) + f(e-1, m-1), f(0, m) = M_m, f(e, 0) = 0.
ExtInt f_bound(std::uint64_t e, unsigned m, const BoundTable& table);
// The recursion itself (test oracle).
ExtInt f_bound_recursive(std::uint64_t e, unsigned m, const BoundTable& table);

// f(e(c), m) over the blocks of c.
ExtInt construction_bound(const Construction& c, unsigned m, const BoundTable& table);

struct InfiniteTableError : std::runtime_error {
  explicit InfiniteTableError(unsigned degree)
      : std::runtime_error("bound table is infinite at degree " + std::to_string(degree)),
        degree(degree) {}
  unsigned degree;
};

// f(l(G), n); requires finite M_m for 2 <= m <= n (InfiniteTableError
// otherwise).  l may be overridden by an externally known bound.
ExtInt uniform_bound(const FiniteGroup& g, unsigned n, const BoundTable& table,
                     std::optional<unsigned> l_override = {}, unsigned threads = 1);

enum class MasseyMode { ExactL, LemmaBound };

// Symbol length bound for m-fold Massey product elements over the standard
// blocks: floor(m^2/4) + m, or 1 + l(Ubar_m(F_p)) when the exact l value is
// computed.
std::uint64_t massey_symbol_bound(unsigned m, std::uint64_t p, MasseyMode mode,
                                  std::size_t cap = 1u << 16, unsigned threads = 1);

} // namespace etsym
