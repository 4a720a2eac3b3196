#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace etsym {

// Unipotent upper-triangular matrix over F_p.  bar-flagged matrices represent
// elements of the quotient U_m -> U_m / <corner>, realized as matrices with
// the (1, m+1) entry forced to 0 and re-zeroed after every product.
class FpMatrix {
 public:
  FpMatrix(std::size_t size, std::uint64_t p, bool bar = false);

  static FpMatrix identity(std::size_t size, std::uint64_t p, bool bar = false);
  // I + c * E_{i,j} (0-based indices, i < j).
  static FpMatrix transvection(std::size_t size, std::uint64_t p, std::size_t i, std::size_t j,
                               std::uint64_t c = 1, bool bar = false);

  std::size_t size() const { return n_; }
  std::uint64_t p() const { return p_; }
  bool bar() const { return bar_; }

  std::uint8_t at(std::size_t i, std::size_t j) const { return e_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, std::uint64_t v);

  FpMatrix mul(const FpMatrix& o) const;
  FpMatrix inverse() const;
  // Forget the bar flag (zero-filled corner): the section used to define the
  // Massey 2-cocycle.
  FpMatrix lift_zero_fill() const;
  FpMatrix to_bar() const;

  bool is_identity() const;
  bool is_unipotent_upper() const;

  bool operator==(const FpMatrix& o) const { return n_ == o.n_ && p_ == o.p_ && e_ == o.e_; }
  bool operator!=(const FpMatrix& o) const { return !(*this == o); }
  // Deterministic total order (row-major entry comparison).
  bool operator<(const FpMatrix& o) const { return e_ < o.e_; }

  std::size_t hash() const;

 private:
  std::size_t n_;
  std::uint64_t p_;
  bool bar_;
  std::vector<std::uint8_t> e_;
};

struct FpMatrixHash {
  std::size_t operator()(const FpMatrix& m) const { return m.hash(); }
};

// Finite p-group with a deterministic element enumeration (BFS order from the
// generators, identity first).  Elements are referred to by index.
class FiniteGroup {
 public:
  using Elt = std::uint32_t;
  static constexpr Elt kIdentity = 0;

  // Closure of the generators under multiplication; throws if more than cap
  // elements are found.
  static FiniteGroup closure(std::vector<FpMatrix> gens, std::size_t cap = 1u << 16);

  std::size_t order() const { return elems_.size(); }
  std::uint64_t p() const { return p_; }
  // nu with exponent(G) = p^nu.
  unsigned exponent_pow() const { return nu_; }
  std::uint64_t exponent() const;

  const FpMatrix& matrix(Elt e) const { return elems_[e]; }
  std::optional<Elt> find(const FpMatrix& m) const;
  Elt index_of(const FpMatrix& m) const; // throws if absent

  Elt mul(Elt a, Elt b) const;
  Elt inv(Elt a) const { return inv_[a]; }
  Elt pow(Elt a, std::int64_t e) const;
  std::uint64_t element_order(Elt a) const;
  bool commute(Elt a, Elt b) const { return mul(a, b) == mul(b, a); }
  bool is_abelian() const;

  const std::vector<Elt>& generator_indices() const { return gen_idx_; }

 private:
  FiniteGroup() = default;
  void finalize();

  std::uint64_t p_ = 2;
  unsigned nu_ = 0;
  std::vector<FpMatrix> elems_;
  std::unordered_map<FpMatrix, Elt, FpMatrixHash> index_;
  std::vector<Elt> inv_;
  std::vector<Elt> gen_idx_;
  // Cayley table, built for small groups; otherwise products go through the
  // matrix representation.
  std::vector<Elt> table_;
  std::size_t table_n_ = 0;
};

// The group of all unipotent upper-triangular (m+1)x(m+1) matrices over F_p;
// order p^(m(m+1)/2).
FiniteGroup unitriangular(std::size_t m, std::uint64_t p, std::size_t cap = 1u << 16);
// Its quotient by the corner subgroup, order p^(m(m+1)/2 - 1); requires m >= 2.
FiniteGroup bar_unitriangular(std::size_t m, std::uint64_t p, std::size_t cap = 1u << 16);
// Z/p^k as a cyclic matrix group (single Jordan block of size p^(k-1)+1).
FiniteGroup cyclic_group(std::uint64_t p, unsigned k, std::size_t cap = 1u << 16);
// (Z/p)^s as block-diagonal 2x2 Jordan blocks.
FiniteGroup elementary_abelian(std::uint64_t p, unsigned s, std::size_t cap = 1u << 16);

struct Subgroup {
  const FiniteGroup* parent = nullptr;
  std::vector<FiniteGroup::Elt> elements; // BFS order from the generators
  std::vector<FiniteGroup::Elt> gens;

  std::size_t order() const { return elements.size(); }
  bool contains(FiniteGroup::Elt e) const;
  bool is_abelian() const;
  std::vector<FiniteGroup::Elt> sorted_elements() const;
};

Subgroup subgroup_closure(const FiniteGroup& g, std::vector<FiniteGroup::Elt> gens);

struct NotInSubgroup {};

// Smallest exponent vector (lexicographic, each entry in [0, order of the
// generator)) with prod gens[i]^a[i] == target; requires pairwise commuting
// generators.
std::optional<std::vector<std::uint64_t>> abelian_dlog(const FiniteGroup& g,
                                                       FiniteGroup::Elt target,
                                                       const std::vector<FiniteGroup::Elt>& gens);

struct MaxAbelianResult {
  std::uint64_t order = 1;
  Subgroup witness;
};

// Exhaustive branch-and-bound over abelian subgroups; deterministic result
// (maximal order, lexicographically least witness) independent of threads.
MaxAbelianResult max_abelian_order(const FiniteGroup& g, unsigned threads = 1);

// log_p of the maximal abelian subgroup order.
unsigned l_value(const FiniteGroup& g, unsigned threads = 1);

// The elementary abelian subgroup of U_m(F_p) of order p^floor((m+1)^2/4)
// formed by the block matrices [[I_r, M], [0, I_{m+1-r}]], r = floor((m+1)/2).
Subgroup goozeff_witness(const FiniteGroup& um, std::size_t m, std::uint64_t p);

// Massey 2-cocycle of the central extension 1 -> F_p -> U_m -> Ubar_m -> 1
// with the zero-fill section: c(x, y) = sum_{j=2}^{m} x_{1,j} y_{j,m+1}.
std::uint64_t massey_cocycle(const FpMatrix& x, const FpMatrix& y);

// Test oracle: enumerate all subgroups of a (small) group.
std::vector<std::vector<FiniteGroup::Elt>> all_subgroups(const FiniteGroup& g,
                                                         std::size_t cap = 100000);

} // namespace etsym
