#include "etsym/cohomology.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <stdexcept>

namespace etsym {

namespace {

FVec zero_vec(std::size_t n) { return FVec(n, 0); }

void add_into(FVec& a, const FVec& b, std::uint64_t coef, std::uint64_t p) {
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = static_cast<std::uint8_t>((a[i] + coef * b[i]) % p);
}

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t v = 1;
  while (e--) v *= b;
  return v;
}

std::size_t encode(const FVec& v, std::uint64_t p) {
  std::size_t idx = 0;
  for (std::size_t i = v.size(); i-- > 0;) idx = idx * p + v[i];
  return idx;
}

FVec decode(std::size_t idx, std::size_t n, std::uint64_t p) {
  FVec v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = static_cast<std::uint8_t>(idx % p);
    idx /= p;
  }
  return v;
}

} // namespace

FVec CohRing::cup_of(const FVec& a, const FVec& b) const {
  if (a.size() != d1 || b.size() != d1)
    throw std::invalid_argument("cup_of: vector dimension mismatch");
  FVec out = zero_vec(d2);
  for (std::size_t i = 0; i < d1; ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < d1; ++j) {
      if (!b[j]) continue;
      add_into(out, cup[i][j], std::uint64_t(a[i]) * b[j], p);
    }
  }
  return out;
}

void CohRing::check_alternating() const {
  if (cup.size() != d1) throw std::invalid_argument("cup table size mismatch");
  for (std::size_t i = 0; i < d1; ++i) {
    if (cup[i].size() != d1) throw std::invalid_argument("cup table row size mismatch");
    for (std::size_t j = 0; j < d1; ++j) {
      if (cup[i][j].size() != d2) throw std::invalid_argument("cup entry dimension mismatch");
      for (std::size_t k = 0; k < d2; ++k)
        if ((cup[i][j][k] + cup[j][i][k]) % p != 0)
          throw std::invalid_argument("cup table is not antisymmetric");
    }
    for (std::size_t k = 0; k < d2; ++k)
      if (cup[i][i][k] != 0) throw std::invalid_argument("cup table is not alternating");
  }
}

CohRing block_ring(const BlockSpec& b) {
  if (b.p == 2) throw std::invalid_argument("cohomology oracle: p = 2 is not supported");
  CohRing r;
  r.p = b.p;
  switch (b.kind) {
    case BlockKind::Trivial:
      break;
    case BlockKind::FreeProCyclic:
      r.d1 = 1;
      r.h1_labels = {b.id + ".x"};
      r.cup = {{zero_vec(0)}};
      break;
    case BlockKind::Demushkin: {
      std::size_t d = b.gen_names.size();
      if (d % 2 != 0)
        throw std::invalid_argument("cohomology oracle: odd-rank Demushkin block rejected");
      r.d1 = d;
      r.d2 = 1;
      r.h2_labels = {b.id + ".top"};
      r.cup.assign(d, std::vector<FVec>(d, zero_vec(1)));
      // non-degenerate alternating pairing in symplectic normal form
      for (std::size_t i = 0; i + 1 < d; i += 2) {
        r.cup[i][i + 1] = {1};
        r.cup[i + 1][i] = {static_cast<std::uint8_t>(b.p - 1)};
      }
      for (std::size_t i = 0; i < d; ++i) r.h1_labels.push_back(b.id + ".e" + std::to_string(i + 1));
      break;
    }
    case BlockKind::SignOfOrderTwo:
      throw std::invalid_argument("cohomology oracle: sign block requires p = 2 (rejected)");
    case BlockKind::Custom: {
      if (!b.ring)
        throw std::invalid_argument("custom block " + b.id + " carries no ring data");
      r.d1 = b.ring->d1;
      r.d2 = b.ring->d2;
      r.cup.assign(r.d1, std::vector<FVec>(r.d1, zero_vec(r.d2)));
      for (std::size_t i = 0; i < r.d1; ++i)
        for (std::size_t j = 0; j < r.d1; ++j) {
          r.cup[i][j] = b.ring->cup[i][j];
          r.cup[i][j].resize(r.d2, 0);
        }
      for (std::size_t i = 0; i < r.d1; ++i) r.h1_labels.push_back(b.id + ".x" + std::to_string(i + 1));
      for (std::size_t i = 0; i < r.d2; ++i) r.h2_labels.push_back(b.id + ".h" + std::to_string(i + 1));
      break;
    }
  }
  r.check_alternating();
  return r;
}

CohRing free_product_ring(const CohRing& a, const CohRing& b) {
  if (a.p != b.p) throw std::invalid_argument("free_product_ring: prime mismatch");
  CohRing r;
  r.p = a.p;
  r.d1 = a.d1 + b.d1;
  r.d2 = a.d2 + b.d2;
  r.prod = CohRing::ProductInfo{a.d1, a.d2};
  r.cup.assign(r.d1, std::vector<FVec>(r.d1, zero_vec(r.d2)));
  for (std::size_t i = 0; i < a.d1; ++i)
    for (std::size_t j = 0; j < a.d1; ++j)
      std::copy(a.cup[i][j].begin(), a.cup[i][j].end(), r.cup[i][j].begin());
  for (std::size_t i = 0; i < b.d1; ++i)
    for (std::size_t j = 0; j < b.d1; ++j)
      std::copy(b.cup[i][j].begin(), b.cup[i][j].end(),
                r.cup[a.d1 + i][a.d1 + j].begin() + a.d2);
  // cross cups vanish in the connected direct sum
  for (const auto& l : a.h1_labels) r.h1_labels.push_back("L." + l);
  for (const auto& l : b.h1_labels) r.h1_labels.push_back("R." + l);
  for (const auto& l : a.h2_labels) r.h2_labels.push_back("L." + l);
  for (const auto& l : b.h2_labels) r.h2_labels.push_back("R." + l);
  return r;
}

CohRing extension_ring(const CohRing& base) {
  if (base.p == 2) throw std::invalid_argument("cohomology oracle: p = 2 is not supported");
  CohRing r;
  r.p = base.p;
  r.d1 = base.d1 + 1;
  r.d2 = base.d2 + base.d1;
  r.ext = CohRing::ExtensionInfo{base.d1, base.d2};
  r.cup.assign(r.d1, std::vector<FVec>(r.d1, zero_vec(r.d2)));
  std::size_t beta = base.d1; // index of the new class
  for (std::size_t i = 0; i < base.d1; ++i)
    for (std::size_t j = 0; j < base.d1; ++j)
      std::copy(base.cup[i][j].begin(), base.cup[i][j].end(), r.cup[i][j].begin());
  for (std::size_t i = 0; i < base.d1; ++i) {
    // beta u Inf(chi_i) is the basis vector at base_d2 + i
    r.cup[beta][i][base.d2 + i] = 1;
    r.cup[i][beta][base.d2 + i] = static_cast<std::uint8_t>(r.p - 1);
  }
  // beta u beta = 0 (alternating, p odd)
  for (const auto& l : base.h1_labels) r.h1_labels.push_back("i." + l);
  r.h1_labels.push_back("beta");
  for (const auto& l : base.h2_labels) r.h2_labels.push_back("i." + l);
  for (const auto& l : base.h1_labels) r.h2_labels.push_back("beta*i." + l);
  return r;
}

CohRing ring_of(const Construction& c) {
  std::function<CohRing(const NodePtr&)> rec = [&](const NodePtr& n) -> CohRing {
    switch (n->type) {
      case ConstructionNode::Type::Leaf:
        return block_ring(*n->block);
      case ConstructionNode::Type::FreeProduct:
        return free_product_ring(rec(n->left), rec(n->right));
      case ConstructionNode::Type::Extension:
        return extension_ring(rec(n->left));
    }
    throw std::logic_error("ring_of: bad node");
  };
  return rec(c.root());
}

FVec restriction_to_base(const CohRing& r, const FVec& omega) {
  if (!r.ext) throw std::invalid_argument("restriction_to_base: not an extension ring");
  if (omega.size() != r.d2) throw std::invalid_argument("restriction_to_base: bad vector");
  return FVec(omega.begin(), omega.begin() + r.ext->base_d2);
}

FVec restriction_to_factor(const CohRing& r, const FVec& omega, bool left) {
  if (!r.prod) throw std::invalid_argument("restriction_to_factor: not a product ring");
  if (omega.size() != r.d2) throw std::invalid_argument("restriction_to_factor: bad vector");
  if (left) return FVec(omega.begin(), omega.begin() + r.prod->left_d2);
  return FVec(omega.begin() + r.prod->left_d2, omega.end());
}

FVec inflate_from_base(const CohRing& r, const FVec& base_omega) {
  if (!r.ext) throw std::invalid_argument("inflate_from_base: not an extension ring");
  if (base_omega.size() != r.ext->base_d2)
    throw std::invalid_argument("inflate_from_base: bad vector");
  FVec out = zero_vec(r.d2);
  std::copy(base_omega.begin(), base_omega.end(), out.begin());
  return out;
}

std::vector<FVec> enumerate_symbols(const CohRing& r, const SymlCaps& caps) {
  std::uint64_t pairs = ipow(r.p, 2 * r.d1);
  if (pairs > caps.symbol_cap)
    throw std::length_error("enumerate_symbols: p^(2 d1) exceeds the cap");
  std::set<FVec> out;
  std::uint64_t n1 = ipow(r.p, r.d1);
  for (std::uint64_t ia = 0; ia < n1; ++ia) {
    FVec a = decode(ia, r.d1, r.p);
    for (std::uint64_t ib = 0; ib < n1; ++ib) {
      FVec s = r.cup_of(a, decode(ib, r.d1, r.p));
      if (std::any_of(s.begin(), s.end(), [](std::uint8_t x) { return x != 0; }))
        out.insert(std::move(s));
    }
  }
  return {out.begin(), out.end()};
}

std::optional<unsigned> syml_exact(const CohRing& r, const FVec& omega, const SymlCaps& caps) {
  if (omega.size() != r.d2) throw std::invalid_argument("syml_exact: bad vector");
  bool zero = std::all_of(omega.begin(), omega.end(), [](std::uint8_t x) { return x == 0; });
  if (zero) return 0;
  std::uint64_t states = ipow(r.p, r.d2);
  if (states > caps.state_cap) throw std::length_error("syml_exact: state space exceeds the cap");

  std::vector<FVec> symbols = enumerate_symbols(r, caps);
  if (symbols.empty()) return std::nullopt;
  std::vector<std::size_t> shifts;
  shifts.reserve(symbols.size());
  for (const auto& s : symbols) shifts.push_back(encode(s, r.p));

  std::size_t target = encode(omega, r.p);
  std::vector<std::uint8_t> seen(states, 0);
  std::vector<std::size_t> frontier{0};
  seen[0] = 1;
  unsigned layer = 0;
  while (!frontier.empty()) {
    ++layer;
    std::vector<std::size_t> next;
    for (std::size_t st : frontier) {
      FVec v = decode(st, r.d2, r.p);
      for (const auto& s : symbols) {
        FVec w = v;
        add_into(w, s, 1, r.p);
        std::size_t idx = encode(w, r.p);
        if (!seen[idx]) {
          if (idx == target) return layer;
          seen[idx] = 1;
          next.push_back(idx);
        }
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

std::vector<int> syml_distances(const CohRing& r, const SymlCaps& caps) {
  std::uint64_t states = ipow(r.p, r.d2);
  if (states > caps.state_cap)
    throw std::length_error("syml_distances: state space exceeds the cap");
  std::vector<FVec> symbols = enumerate_symbols(r, caps);
  std::vector<int> dist(states, -1);
  dist[0] = 0;
  std::deque<std::size_t> q{0};
  while (!q.empty()) {
    std::size_t st = q.front();
    q.pop_front();
    FVec v = decode(st, r.d2, r.p);
    for (const auto& s : symbols) {
      FVec w = v;
      add_into(w, s, 1, r.p);
      std::size_t idx = encode(w, r.p);
      if (dist[idx] < 0) {
        dist[idx] = dist[st] + 1;
        q.push_back(idx);
      }
    }
  }
  return dist;
}

std::size_t encode_state(const FVec& v, std::uint64_t p) { return encode(v, p); }

SymlScan syml_scan(const CohRing& r, const SymlCaps& caps) {
  std::vector<int> dist = syml_distances(r, caps);
  SymlScan scan;
  scan.argmax = zero_vec(r.d2);
  for (std::size_t st = 0; st < dist.size(); ++st) {
    if (dist[st] < 0) {
      scan.all_reachable = false;
      continue;
    }
    if (static_cast<unsigned>(dist[st]) > scan.max_syml) {
      scan.max_syml = static_cast<unsigned>(dist[st]);
      scan.argmax = decode(st, r.d2, r.p);
    }
  }
  return scan;
}

bool representable_by_k_symbols(const CohRing& r, const FVec& omega, unsigned k,
                                const SymlCaps& caps) {
  if (k == 0)
    return std::all_of(omega.begin(), omega.end(), [](std::uint8_t x) { return x == 0; });
  std::vector<FVec> symbols = enumerate_symbols(r, caps);
  // exhaustive k-tuples (with repetition); test-only, tiny rings
  std::function<bool(unsigned, const FVec&)> rec = [&](unsigned left, const FVec& acc) -> bool {
    if (left == 0) return acc == omega;
    for (const auto& s : symbols) {
      FVec next = acc;
      add_into(next, s, 1, r.p);
      if (rec(left - 1, next)) return true;
    }
    return false;
  };
  return rec(k, zero_vec(r.d2));
}

} // namespace etsym
