#include "etsym/fpgroup.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <stdexcept>
#include <thread>

namespace etsym {

FpMatrix::FpMatrix(std::size_t size, std::uint64_t p, bool bar)
    : n_(size), p_(p), bar_(bar), e_(size * size, 0) {
  if (size < 2) throw std::invalid_argument("FpMatrix: size must be >= 2");
  if (p < 2 || p > 251) throw std::invalid_argument("FpMatrix: bad prime");
  for (std::size_t i = 0; i < n_; ++i) e_[i * n_ + i] = 1;
}

FpMatrix FpMatrix::identity(std::size_t size, std::uint64_t p, bool bar) {
  return FpMatrix(size, p, bar);
}

FpMatrix FpMatrix::transvection(std::size_t size, std::uint64_t p, std::size_t i, std::size_t j,
                                std::uint64_t c, bool bar) {
  if (i >= j || j >= size) throw std::invalid_argument("transvection: need i < j < size");
  FpMatrix m(size, p, bar);
  m.set(i, j, c);
  if (bar && i == 0 && j == size - 1) m.set(i, j, 0);
  return m;
}

void FpMatrix::set(std::size_t i, std::size_t j, std::uint64_t v) {
  e_[i * n_ + j] = static_cast<std::uint8_t>(v % p_);
}

FpMatrix FpMatrix::mul(const FpMatrix& o) const {
  if (n_ != o.n_ || p_ != o.p_ || bar_ != o.bar_)
    throw std::invalid_argument("FpMatrix: shape mismatch");
  FpMatrix out(n_, p_, bar_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      std::uint64_t s = 0;
      for (std::size_t k = i; k <= j; ++k) s += std::uint64_t(at(i, k)) * o.at(k, j);
      out.e_[i * n_ + j] = static_cast<std::uint8_t>(s % p_);
    }
  }
  if (bar_) out.e_[n_ - 1] = 0; // quotient law: re-zero the corner
  return out;
}

FpMatrix FpMatrix::inverse() const {
  // back substitution; the inverse of a unipotent matrix is unipotent
  FpMatrix out(n_, p_, false);
  for (std::size_t col = 0; col < n_; ++col) {
    for (std::size_t i = col; i-- > 0;) {
      std::uint64_t s = 0;
      for (std::size_t k = i + 1; k <= col; ++k)
        s += std::uint64_t(at(i, k)) * out.at(k, col);
      s %= p_;
      out.e_[i * n_ + col] = static_cast<std::uint8_t>((p_ - s) % p_);
    }
  }
  out.bar_ = bar_;
  if (bar_) out.e_[n_ - 1] = 0;
  return out;
}

FpMatrix FpMatrix::lift_zero_fill() const {
  FpMatrix out = *this;
  out.bar_ = false;
  return out;
}

FpMatrix FpMatrix::to_bar() const {
  FpMatrix out = *this;
  out.bar_ = true;
  out.e_[n_ - 1] = 0;
  return out;
}

bool FpMatrix::is_identity() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (at(i, j) != (i == j ? 1 : 0)) return false;
  return true;
}

bool FpMatrix::is_unipotent_upper() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (at(i, i) != 1) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (at(i, j) != 0) return false;
  }
  return true;
}

std::size_t FpMatrix::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (std::uint8_t v : e_) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------

FiniteGroup FiniteGroup::closure(std::vector<FpMatrix> gens, std::size_t cap) {
  FiniteGroup g;
  if (gens.empty()) throw std::invalid_argument("FiniteGroup: need at least one generator for shape");
  g.p_ = gens[0].p();
  FpMatrix id = FpMatrix::identity(gens[0].size(), gens[0].p(), gens[0].bar());
  g.elems_.push_back(id);
  g.index_[id] = 0;
  std::deque<Elt> todo{0};
  while (!todo.empty()) {
    Elt cur = todo.front();
    todo.pop_front();
    for (const auto& gen : gens) {
      FpMatrix m = g.elems_[cur].mul(gen);
      auto it = g.index_.find(m);
      if (it == g.index_.end()) {
        if (g.elems_.size() >= cap)
          throw std::length_error("FiniteGroup: element cap exceeded");
        Elt idx = static_cast<Elt>(g.elems_.size());
        g.index_[m] = idx;
        g.elems_.push_back(m);
        todo.push_back(idx);
      }
    }
  }
  for (const auto& gen : gens) g.gen_idx_.push_back(g.index_.at(gen));
  g.finalize();
  return g;
}

void FiniteGroup::finalize() {
  std::size_t n = elems_.size();
  // p-group sanity: order is a power of p
  std::size_t o = n;
  while (o % p_ == 0) o /= p_;
  if (o != 1) throw std::domain_error("FiniteGroup: order is not a power of p");
  inv_.resize(n);
  for (std::size_t i = 0; i < n; ++i) inv_[i] = index_.at(elems_[i].inverse());
  if (n <= 1024) {
    table_n_ = n;
    table_.resize(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        table_[a * n + b] = index_.at(elems_[a].mul(elems_[b]));
  }
  nu_ = 0;
  for (std::size_t i = 0; i < n; ++i) {
    unsigned t = 0;
    Elt e = static_cast<Elt>(i);
    while (e != kIdentity) {
      Elt q = e;
      for (std::uint64_t s = 1; s < p_; ++s) q = mul(q, e);
      e = q; // e^p
      ++t;
    }
    nu_ = std::max(nu_, t);
  }
}

std::uint64_t FiniteGroup::exponent() const {
  std::uint64_t e = 1;
  for (unsigned i = 0; i < nu_; ++i) e *= p_;
  return e;
}

std::optional<FiniteGroup::Elt> FiniteGroup::find(const FpMatrix& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FiniteGroup::Elt FiniteGroup::index_of(const FpMatrix& m) const {
  auto e = find(m);
  if (!e) throw std::invalid_argument("FiniteGroup: element not in group");
  return *e;
}

FiniteGroup::Elt FiniteGroup::mul(Elt a, Elt b) const {
  if (table_n_) return table_[std::size_t(a) * table_n_ + b];
  return index_.at(elems_[a].mul(elems_[b]));
}

FiniteGroup::Elt FiniteGroup::pow(Elt a, std::int64_t e) const {
  if (e < 0) {
    a = inv_[a];
    e = -e;
  }
  Elt acc = kIdentity;
  Elt base = a;
  std::uint64_t n = static_cast<std::uint64_t>(e);
  while (n) {
    if (n & 1) acc = mul(acc, base);
    base = mul(base, base);
    n >>= 1;
  }
  return acc;
}

std::uint64_t FiniteGroup::element_order(Elt a) const {
  std::uint64_t o = 1;
  Elt e = a;
  while (e != kIdentity) {
    e = mul(e, a);
    ++o;
  }
  return o;
}

bool FiniteGroup::is_abelian() const {
  for (Elt a : gen_idx_)
    for (Elt b : gen_idx_)
      if (!commute(a, b)) return false;
  return true;
}

FiniteGroup unitriangular(std::size_t m, std::uint64_t p, std::size_t cap) {
  if (m < 1) throw std::invalid_argument("unitriangular: m >= 1 required");
  std::vector<FpMatrix> gens;
  for (std::size_t i = 0; i + 1 <= m; ++i)
    gens.push_back(FpMatrix::transvection(m + 1, p, i, i + 1));
  FiniteGroup g = FiniteGroup::closure(std::move(gens), cap);
  std::uint64_t expect = 1;
  for (std::size_t i = 0; i < m * (m + 1) / 2; ++i) expect *= p;
  if (g.order() != expect) throw std::logic_error("unitriangular: unexpected order");
  return g;
}

FiniteGroup bar_unitriangular(std::size_t m, std::uint64_t p, std::size_t cap) {
  if (m < 2) throw std::invalid_argument("bar_unitriangular: m >= 2 required");
  std::vector<FpMatrix> gens;
  for (std::size_t i = 0; i + 1 <= m; ++i)
    gens.push_back(FpMatrix::transvection(m + 1, p, i, i + 1, 1, /*bar=*/true));
  FiniteGroup g = FiniteGroup::closure(std::move(gens), cap);
  std::uint64_t expect = 1;
  for (std::size_t i = 0; i + 1 < m * (m + 1) / 2; ++i) expect *= p;
  if (g.order() != expect) throw std::logic_error("bar_unitriangular: unexpected order");
  return g;
}

FiniteGroup cyclic_group(std::uint64_t p, unsigned k, std::size_t cap) {
  if (k < 1) throw std::invalid_argument("cyclic_group: k >= 1 required");
  std::size_t size = 1;
  for (unsigned i = 0; i + 1 < k; ++i) size *= p;
  size += 1; // p^(k-1) + 1 rows suffice for an element of order p^k
  FpMatrix j(size, p);
  for (std::size_t i = 0; i + 1 < size; ++i) j.set(i, i + 1, 1);
  FiniteGroup g = FiniteGroup::closure({j}, cap);
  if (g.exponent_pow() != k) throw std::logic_error("cyclic_group: unexpected exponent");
  return g;
}

FiniteGroup elementary_abelian(std::uint64_t p, unsigned s, std::size_t cap) {
  if (s < 1) throw std::invalid_argument("elementary_abelian: s >= 1 required");
  std::vector<FpMatrix> gens;
  for (unsigned i = 0; i < s; ++i)
    gens.push_back(FpMatrix::transvection(2 * s, p, 2 * i, 2 * i + 1));
  return FiniteGroup::closure(std::move(gens), cap);
}

// ---------------------------------------------------------------------------

bool Subgroup::contains(FiniteGroup::Elt e) const {
  return std::find(elements.begin(), elements.end(), e) != elements.end();
}

bool Subgroup::is_abelian() const {
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j)
      if (!parent->commute(gens[i], gens[j])) return false;
  return true;
}

std::vector<FiniteGroup::Elt> Subgroup::sorted_elements() const {
  auto v = elements;
  std::sort(v.begin(), v.end());
  return v;
}

Subgroup subgroup_closure(const FiniteGroup& g, std::vector<FiniteGroup::Elt> gens) {
  Subgroup s;
  s.parent = &g;
  s.gens = gens;
  std::vector<bool> seen(g.order(), false);
  seen[FiniteGroup::kIdentity] = true;
  s.elements.push_back(FiniteGroup::kIdentity);
  std::deque<FiniteGroup::Elt> todo{FiniteGroup::kIdentity};
  while (!todo.empty()) {
    auto cur = todo.front();
    todo.pop_front();
    for (auto gen : gens) {
      auto m = g.mul(cur, gen);
      if (!seen[m]) {
        seen[m] = true;
        s.elements.push_back(m);
        todo.push_back(m);
      }
    }
  }
  return s;
}

std::optional<std::vector<std::uint64_t>> abelian_dlog(const FiniteGroup& g,
                                                       FiniteGroup::Elt target,
                                                       const std::vector<FiniteGroup::Elt>& gens) {
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j)
      if (!g.commute(gens[i], gens[j]))
        throw std::invalid_argument("abelian_dlog: generators do not commute");
  std::vector<std::uint64_t> orders;
  orders.reserve(gens.size());
  for (auto e : gens) orders.push_back(g.element_order(e));

  // depth-first in lexicographic order; the first hit is the smallest vector
  std::vector<std::uint64_t> a(gens.size(), 0);
  std::function<std::optional<std::vector<std::uint64_t>>(std::size_t, FiniteGroup::Elt)> rec =
      [&](std::size_t level, FiniteGroup::Elt prod) -> std::optional<std::vector<std::uint64_t>> {
    if (level == gens.size()) {
      if (prod == target) return a;
      return std::nullopt;
    }
    FiniteGroup::Elt cur = prod;
    for (std::uint64_t e = 0; e < orders[level]; ++e) {
      a[level] = e;
      if (auto r = rec(level + 1, cur)) return r;
      cur = g.mul(cur, gens[level]);
    }
    a[level] = 0;
    return std::nullopt;
  };
  return rec(0, FiniteGroup::kIdentity);
}

// ---------------------------------------------------------------------------
// Maximal abelian subgroup search.

namespace {

std::uint64_t largest_p_power_leq(std::uint64_t p, std::uint64_t x) {
  std::uint64_t v = 1;
  while (v * p <= x) v *= p;
  return v;
}

// canonical generating set: greedily take the least-index elements not yet
// generated, so equal subgroups always serialize identically
Subgroup canonical_subgroup(const FiniteGroup& g, const std::vector<FiniteGroup::Elt>& sorted) {
  std::vector<FiniteGroup::Elt> gens;
  Subgroup cur = subgroup_closure(g, gens);
  while (cur.order() < sorted.size()) {
    for (auto e : sorted) {
      if (!cur.contains(e)) {
        gens.push_back(e);
        break;
      }
    }
    cur = subgroup_closure(g, gens);
  }
  return cur;
}

struct BestWitness {
  std::uint64_t order = 0;
  std::vector<FiniteGroup::Elt> sorted;

  // (order desc, lexicographic element list asc)
  bool improves(std::uint64_t o, const std::vector<FiniteGroup::Elt>& s) const {
    if (o != order) return o > order;
    return s < sorted;
  }
};

struct AbelianSearch {
  const FiniteGroup& g;
  BestWitness best;

  void consider(const Subgroup& a) {
    auto s = a.sorted_elements();
    if (best.improves(a.order(), s)) {
      best.order = a.order();
      best.sorted = std::move(s);
    }
  }

  void dfs(const Subgroup& a, const std::vector<FiniteGroup::Elt>& cands) {
    consider(a);
    if (largest_p_power_leq(g.p(), a.order() + cands.size()) < best.order) return;
    std::vector<bool> in_a(g.order(), false);
    for (auto e : a.elements) in_a[e] = true;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      auto x = cands[i];
      if (in_a[x]) continue;
      auto gens = a.gens;
      gens.push_back(x);
      Subgroup ext = subgroup_closure(g, gens);
      std::vector<bool> in_ext(g.order(), false);
      for (auto e : ext.elements) in_ext[e] = true;
      std::vector<FiniteGroup::Elt> next;
      for (std::size_t j = i + 1; j < cands.size(); ++j) {
        auto y = cands[j];
        if (!in_ext[y] && g.commute(y, x)) next.push_back(y);
      }
      dfs(ext, next);
    }
  }
};

} // namespace

MaxAbelianResult max_abelian_order(const FiniteGroup& g, unsigned threads) {
  Subgroup triv = subgroup_closure(g, {});
  std::vector<FiniteGroup::Elt> cands;
  for (FiniteGroup::Elt e = 1; e < g.order(); ++e) cands.push_back(e);

  auto run_branch = [&](AbelianSearch& search, std::size_t i) {
    auto x = cands[i];
    Subgroup ext = subgroup_closure(g, {x});
    std::vector<bool> in_ext(g.order(), false);
    for (auto e : ext.elements) in_ext[e] = true;
    std::vector<FiniteGroup::Elt> next;
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      auto y = cands[j];
      if (!in_ext[y] && g.commute(y, x)) next.push_back(y);
    }
    search.dfs(ext, next);
  };

  if (threads <= 1 || cands.size() < 2) {
    AbelianSearch search{g, {}};
    search.consider(triv);
    for (std::size_t i = 0; i < cands.size(); ++i) run_branch(search, i);
    MaxAbelianResult r;
    r.order = search.best.order;
    r.witness = canonical_subgroup(g, search.best.sorted);
    return r;
  }

  std::vector<AbelianSearch> searches;
  searches.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) searches.push_back(AbelianSearch{g, {}});
  searches[0].consider(triv);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < cands.size(); i += threads) run_branch(searches[t], i);
    });
  }
  for (auto& th : pool) th.join();
  // deterministic reduction regardless of scheduling
  BestWitness best;
  for (auto& s : searches)
    if (s.best.order && best.improves(s.best.order, s.best.sorted)) best = s.best;
  MaxAbelianResult r;
  r.order = best.order;
  r.witness = canonical_subgroup(g, best.sorted);
  return r;
}

unsigned l_value(const FiniteGroup& g, unsigned threads) {
  auto r = max_abelian_order(g, threads);
  unsigned l = 0;
  std::uint64_t o = r.order;
  while (o > 1) {
    o /= g.p();
    ++l;
  }
  return l;
}

Subgroup goozeff_witness(const FiniteGroup& um, std::size_t m, std::uint64_t p) {
  std::size_t r = (m + 1) / 2;
  std::vector<FiniteGroup::Elt> gens;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = r; j <= m; ++j)
      gens.push_back(um.index_of(FpMatrix::transvection(m + 1, p, i, j)));
  return subgroup_closure(um, gens);
}

std::uint64_t massey_cocycle(const FpMatrix& x, const FpMatrix& y) {
  if (x.size() != y.size() || x.p() != y.p())
    throw std::invalid_argument("massey_cocycle: shape mismatch");
  std::size_t n = x.size();
  std::uint64_t s = 0;
  for (std::size_t j = 1; j + 1 < n; ++j) s += std::uint64_t(x.at(0, j)) * y.at(j, n - 1);
  return s % x.p();
}

std::vector<std::vector<FiniteGroup::Elt>> all_subgroups(const FiniteGroup& g, std::size_t cap) {
  std::set<std::vector<FiniteGroup::Elt>> seen;
  std::deque<std::vector<FiniteGroup::Elt>> todo;
  auto add = [&](const Subgroup& s) {
    auto key = s.sorted_elements();
    if (seen.insert(key).second) {
      if (seen.size() > cap) throw std::length_error("all_subgroups: cap exceeded");
      todo.push_back(s.gens);
    }
  };
  add(subgroup_closure(g, {}));
  while (!todo.empty()) {
    auto gens = todo.front();
    todo.pop_front();
    for (FiniteGroup::Elt e = 1; e < g.order(); ++e) {
      auto ext = gens;
      ext.push_back(e);
      add(subgroup_closure(g, ext));
    }
  }
  return {seen.begin(), seen.end()};
}

} // namespace etsym
