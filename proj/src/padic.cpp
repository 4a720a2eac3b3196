#include "etsym/padic.hpp"

#include <limits>

namespace etsym {

namespace {

std::uint64_t checked_pow(std::uint64_t base, unsigned exp) {
  std::uint64_t v = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (v > std::numeric_limits<std::uint32_t>::max())
      throw std::overflow_error("Zmod: modulus p^N does not fit in 32 bits");
    v *= base;
  }
  return v;
}

} // namespace

Zmod::Zmod(std::uint64_t prime, unsigned precision, std::int64_t value)
    : p_(prime), n_(precision) {
  if (prime < 2) throw std::invalid_argument("Zmod: prime must be >= 2");
  if (precision < 1) throw std::invalid_argument("Zmod: precision must be >= 1");
  mod_ = checked_pow(prime, precision);
  std::int64_t m = static_cast<std::int64_t>(mod_);
  std::int64_t r = value % m;
  if (r < 0) r += m;
  r_ = static_cast<std::uint64_t>(r);
}

void Zmod::check_same(const Zmod& o) const {
  if (p_ != o.p_ || n_ != o.n_)
    throw std::invalid_argument("Zmod: prime/precision mismatch");
}

Zmod Zmod::operator+(const Zmod& o) const {
  check_same(o);
  return Zmod(p_, n_, static_cast<std::int64_t>((r_ + o.r_) % mod_));
}

Zmod Zmod::operator-(const Zmod& o) const {
  check_same(o);
  return Zmod(p_, n_, static_cast<std::int64_t>((r_ + mod_ - o.r_) % mod_));
}

Zmod Zmod::operator*(const Zmod& o) const {
  check_same(o);
  return Zmod(p_, n_, static_cast<std::int64_t>((r_ * o.r_) % mod_));
}

Zmod Zmod::operator-() const { return Zmod(p_, n_, -static_cast<std::int64_t>(r_)); }

bool Zmod::operator==(const Zmod& o) const {
  return p_ == o.p_ && n_ == o.n_ && r_ == o.r_;
}

Zmod Zmod::inverse() const {
  if (!is_unit()) throw std::domain_error("Zmod: inverse of a non-unit");
  // Units of Z/p^N have order dividing p^(N-1)*(p-1).
  std::uint64_t group_order = (mod_ / p_) * (p_ - 1);
  return Zmod(p_, n_, static_cast<std::int64_t>(mod_pow(r_, group_order - 1, mod_)));
}

Zmod Zmod::pow(std::int64_t e) const {
  if (e < 0) return inverse().pow(-e);
  return Zmod(p_, n_, static_cast<std::int64_t>(mod_pow(r_, static_cast<std::uint64_t>(e), mod_)));
}

Zmod Zmod::reduced(unsigned precision) const {
  if (precision > n_) throw std::invalid_argument("Zmod: cannot raise precision");
  return Zmod(p_, precision, static_cast<std::int64_t>(r_));
}

std::uint64_t Zmod::pow_u64(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t v = 1;
  while (exp--) v *= base;
  return v;
}

std::uint64_t Zmod::mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t v = 1 % mod;
  base %= mod;
  while (exp) {
    if (exp & 1) v = (v * base) % mod;
    base = (base * base) % mod;
    exp >>= 1;
  }
  return v;
}

ZmodMatrix::ZmodMatrix(std::size_t rank, std::uint64_t prime, unsigned precision)
    : r_(rank), p_(prime), n_(precision), e_(rank * rank, 0) {
  mod_ = Zmod(prime, precision, 0).modulus();
}

ZmodMatrix ZmodMatrix::identity(std::size_t rank, std::uint64_t prime, unsigned precision) {
  ZmodMatrix m(rank, prime, precision);
  for (std::size_t i = 0; i < rank; ++i) m.set(i, i, 1);
  return m;
}

void ZmodMatrix::set(std::size_t row, std::size_t col, std::int64_t v) {
  std::int64_t m = static_cast<std::int64_t>(mod_);
  std::int64_t r = v % m;
  if (r < 0) r += m;
  e_[row * r_ + col] = static_cast<std::uint64_t>(r);
}

ZmodMatrix ZmodMatrix::mul(const ZmodMatrix& o) const {
  if (r_ != o.r_ || p_ != o.p_ || n_ != o.n_)
    throw std::invalid_argument("ZmodMatrix: dimension/precision mismatch");
  ZmodMatrix out(r_, p_, n_);
  for (std::size_t i = 0; i < r_; ++i)
    for (std::size_t k = 0; k < r_; ++k) {
      std::uint64_t a = entry(i, k);
      if (!a) continue;
      for (std::size_t j = 0; j < r_; ++j)
        out.e_[i * r_ + j] = (out.e_[i * r_ + j] + a * o.entry(k, j)) % mod_;
    }
  return out;
}

ZmodMatrix ZmodMatrix::top_left(std::size_t k) const {
  if (k > r_) throw std::out_of_range("ZmodMatrix: block size out of range");
  ZmodMatrix out(k, p_, n_);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out.e_[i * k + j] = entry(i, j);
  return out;
}

ZmodMatrix ZmodMatrix::bottom_right(std::size_t k) const {
  if (k > r_) throw std::out_of_range("ZmodMatrix: block size out of range");
  std::size_t s = r_ - k;
  ZmodMatrix out(s, p_, n_);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      out.e_[i * s + j] = entry(k + i, k + j);
  return out;
}

ZmodMatrix ZmodMatrix::reduced(unsigned precision) const {
  ZmodMatrix out(r_, p_, precision);
  for (std::size_t i = 0; i < r_; ++i)
    for (std::size_t j = 0; j < r_; ++j)
      out.set(i, j, static_cast<std::int64_t>(entry(i, j)));
  return out;
}

bool ZmodMatrix::is_lower_triangular() const {
  for (std::size_t i = 0; i < r_; ++i)
    for (std::size_t j = i + 1; j < r_; ++j)
      if (entry(i, j) != 0) return false;
  return true;
}

bool ZmodMatrix::has_unit_diagonal() const {
  for (std::size_t i = 0; i < r_; ++i)
    if (entry(i, i) % p_ == 0) return false;
  return true;
}

bool ZmodMatrix::operator==(const ZmodMatrix& o) const {
  return r_ == o.r_ && p_ == o.p_ && n_ == o.n_ && e_ == o.e_;
}

AAutMatrix::AAutMatrix(ZmodMatrix m) : m_(std::move(m)) {
  if (!m_.is_lower_triangular())
    throw std::invalid_argument("AAutMatrix: filtration not preserved");
  if (!m_.has_unit_diagonal())
    throw std::invalid_argument("AAutMatrix: non-unit diagonal entry");
}

AAutMatrix compose(const AAutMatrix& a, const AAutMatrix& b) {
  return AAutMatrix(a.matrix().mul(b.matrix()));
}

AAutMatrix invert(const AAutMatrix& m) {
  // Forward substitution; the inverse of a unit lower-triangular matrix is
  // again unit lower-triangular.
  std::size_t r = m.rank();
  std::uint64_t mod = m.matrix().modulus();
  ZmodMatrix x(r, m.prime(), m.precision());
  for (std::size_t col = 0; col < r; ++col) {
    for (std::size_t row = col; row < r; ++row) {
      std::uint64_t acc = (row == col) ? 1 : 0;
      std::uint64_t s = 0;
      for (std::size_t k = col; k < row; ++k)
        s = (s + m.entry(row, k) * x.entry(k, col)) % mod;
      acc = (acc + mod - s) % mod;
      Zmod d(m.prime(), m.precision(), static_cast<std::int64_t>(m.entry(row, row)));
      x.set(row, col, static_cast<std::int64_t>((acc * d.inverse().residue()) % mod));
    }
  }
  return AAutMatrix(x);
}

AAutMatrix project_bar(const AAutMatrix& m, std::size_t k) {
  if (k < 1 || k > m.rank()) throw std::out_of_range("project_bar: k out of range");
  return AAutMatrix(m.matrix().top_left(k));
}

AAutMatrix restrict_tail(const AAutMatrix& m, std::size_t k) {
  if (k > m.rank()) throw std::out_of_range("restrict_tail: k out of range");
  return AAutMatrix(m.matrix().bottom_right(k));
}

AAutMatrix reduce_precision(const AAutMatrix& m, unsigned precision) {
  return AAutMatrix(m.matrix().reduced(precision));
}

} // namespace etsym
