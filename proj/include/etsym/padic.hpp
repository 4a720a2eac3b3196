#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace etsym {

// Arithmetic in Z/p^N, used as a truncation of the p-adic integers Z_p.
// Values are stored as canonical residues in [0, p^N).
class Zmod {
 public:
  Zmod(std::uint64_t prime, unsigned precision, std::int64_t value);

  std::uint64_t residue() const { return r_; }
  std::uint64_t prime() const { return p_; }
  unsigned precision() const { return n_; }
  std::uint64_t modulus() const { return mod_; }

  bool is_unit() const { return r_ % p_ != 0; }
  // 1 mod p, i.e. lies in the image of 1 + pZ_p.
  bool is_principal_unit() const { return r_ % p_ == 1 % p_; }
  bool is_one() const { return r_ == 1 % mod_; }

  Zmod operator+(const Zmod& o) const;
  Zmod operator-(const Zmod& o) const;
  Zmod operator*(const Zmod& o) const;
  Zmod operator-() const;
  bool operator==(const Zmod& o) const;
  bool operator!=(const Zmod& o) const { return !(*this == o); }

  Zmod inverse() const;           // requires is_unit()
  Zmod pow(std::int64_t e) const; // negative e requires unit
  Zmod reduced(unsigned precision) const;

  static std::uint64_t pow_u64(std::uint64_t base, std::uint64_t exp); // no overflow guard
  static std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t mod);

 private:
  void check_same(const Zmod& o) const;
  std::uint64_t p_;
  unsigned n_;
  std::uint64_t mod_; // p^N
  std::uint64_t r_;
};

// A unit congruent to 1 mod p; houses values of the character theta.
class PrincipalUnit {
 public:
  explicit PrincipalUnit(Zmod v) : v_(v) {
    if (!v_.is_principal_unit())
      throw std::invalid_argument("PrincipalUnit: residue not 1 mod p");
  }
  PrincipalUnit(std::uint64_t p, unsigned n, std::int64_t value)
      : PrincipalUnit(Zmod(p, n, value)) {}

  const Zmod& value() const { return v_; }
  std::uint64_t residue() const { return v_.residue(); }
  bool is_one() const { return v_.is_one(); }

  PrincipalUnit operator*(const PrincipalUnit& o) const { return PrincipalUnit(v_ * o.v_); }
  PrincipalUnit pow(std::int64_t e) const { return PrincipalUnit(v_.pow(e)); }
  bool operator==(const PrincipalUnit& o) const { return v_ == o.v_; }

 private:
  Zmod v_;
};

// Square matrix over Z/p^N, entry(j, i) = coefficient of u_{j+1} in the image
// of u_{i+1}.  Column i is the exponent vector of the image of the i-th basis
// element; composition is therefore the ordinary matrix product.
class ZmodMatrix {
 public:
  ZmodMatrix(std::size_t rank, std::uint64_t prime, unsigned precision);

  static ZmodMatrix identity(std::size_t rank, std::uint64_t prime, unsigned precision);

  std::size_t rank() const { return r_; }
  std::uint64_t prime() const { return p_; }
  unsigned precision() const { return n_; }
  std::uint64_t modulus() const { return mod_; }

  std::uint64_t entry(std::size_t row, std::size_t col) const { return e_[row * r_ + col]; }
  void set(std::size_t row, std::size_t col, std::int64_t v);

  ZmodMatrix mul(const ZmodMatrix& o) const;
  // Top-left k x k block: the endomorphism induced on Z_1 x ... x Z_k
  // after quotienting by V^k.
  ZmodMatrix top_left(std::size_t k) const;
  // Bottom-right (r-k) x (r-k) block: the restriction to Z_{k+1} x ... x Z_r.
  ZmodMatrix bottom_right(std::size_t k) const;
  ZmodMatrix reduced(unsigned precision) const;

  // entry(j, i) == 0 for j < i: the image of u_i lies in span(u_i .. u_r),
  // equivalently every tail subgroup V^j is mapped into itself.
  bool is_lower_triangular() const;
  bool has_unit_diagonal() const;
  // Both conditions together characterize the filtration-preserving
  // automorphisms of Z_p^r.
  bool is_filtration_automorphism() const {
    return is_lower_triangular() && has_unit_diagonal();
  }

  bool operator==(const ZmodMatrix& o) const;
  bool operator!=(const ZmodMatrix& o) const { return !(*this == o); }

 private:
  std::size_t r_;
  std::uint64_t p_;
  unsigned n_;
  std::uint64_t mod_;
  std::vector<std::uint64_t> e_;
};

// Validated filtration-preserving automorphism of Z_p^r (an A-automorphism
// of the tuple A = (Z_1, ..., Z_r) truncated mod p^N).
class AAutMatrix {
 public:
  explicit AAutMatrix(ZmodMatrix m);

  static AAutMatrix identity(std::size_t rank, std::uint64_t prime, unsigned precision) {
    return AAutMatrix(ZmodMatrix::identity(rank, prime, precision));
  }

  const ZmodMatrix& matrix() const { return m_; }
  std::size_t rank() const { return m_.rank(); }
  std::uint64_t prime() const { return m_.prime(); }
  unsigned precision() const { return m_.precision(); }
  std::uint64_t entry(std::size_t row, std::size_t col) const { return m_.entry(row, col); }

  bool operator==(const AAutMatrix& o) const { return m_ == o.m_; }

 private:
  ZmodMatrix m_;
};

// compose(a, b): column i of the result is the exponent vector of a(b(u_i)).
AAutMatrix compose(const AAutMatrix& a, const AAutMatrix& b);
AAutMatrix invert(const AAutMatrix& m);
// Quotient to Z_1 x ... x Z_k (top-left block).
AAutMatrix project_bar(const AAutMatrix& m, std::size_t k);
// Restriction to Z_{k+1} x ... x Z_r (bottom-right block).
AAutMatrix restrict_tail(const AAutMatrix& m, std::size_t k);
AAutMatrix reduce_precision(const AAutMatrix& m, unsigned precision);

} // namespace etsym
