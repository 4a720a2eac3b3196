#include "etsym/bounds.hpp"

#include <functional>
#include <set>

namespace etsym {

ExtInt ext_max(const ExtInt& a, const ExtInt& b) {
  if (a.inf || b.inf) return ExtInt::infinity();
  return ExtInt::of(std::max(a.v, b.v));
}

BoundTable::BoundTable(std::vector<ExtInt> values, ExtInt tail)
    : values_(std::move(values)), tail_(tail) {
  clamp_m1();
}

void BoundTable::clamp_m1() {
  if (values_.empty()) values_.push_back(tail_);
  ExtInt m1 = values_[0];
  if (m1.is_finite() && m1.v < 1) {
    values_[0] = ExtInt::of(1);
    m1_clamped_ = true;
  }
}

ExtInt BoundTable::value(unsigned m) const {
  if (m == 0) return ExtInt::of(0);
  if (m <= values_.size()) return values_[m - 1];
  return tail_;
}

BoundTable BoundTable::sup(const std::vector<BoundTable>& tables) {
  if (tables.empty()) return BoundTable({ExtInt::of(0)}, ExtInt::of(0));
  std::size_t n = 1;
  for (const auto& t : tables) n = std::max(n, t.values_.size());
  std::vector<ExtInt> vals(n, ExtInt::of(0));
  ExtInt tail = ExtInt::of(0);
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < n; ++i)
      vals[i] = ext_max(vals[i], t.value(static_cast<unsigned>(i + 1)));
    tail = ext_max(tail, t.tail_);
  }
  return BoundTable(std::move(vals), tail);
}

BoundTable BoundTable::standard(std::uint64_t p, bool include_sign_block) {
  if (include_sign_block) {
    if (p != 2) throw std::invalid_argument("standard table: sign block requires p = 2");
    return BoundTable({ExtInt::of(1)}, ExtInt::of(1));
  }
  return BoundTable({ExtInt::of(1), ExtInt::of(1)}, ExtInt::of(0));
}

BoundTable BoundTable::of_block(const BlockSpec& b) {
  switch (b.kind) {
    case BlockKind::Trivial:
      return BoundTable({ExtInt::of(0)}, ExtInt::of(0));
    case BlockKind::FreeProCyclic:
      return BoundTable({ExtInt::of(1)}, ExtInt::of(0));
    case BlockKind::Demushkin:
      return BoundTable({ExtInt::of(1), ExtInt::of(1)}, ExtInt::of(0));
    case BlockKind::SignOfOrderTwo:
      return BoundTable({ExtInt::of(1)}, ExtInt::of(1));
    case BlockKind::Custom: {
      if (b.bounds.empty())
        throw std::invalid_argument("custom block " + b.id + " declares no bound rows");
      unsigned top = 0;
      for (const auto& row : b.bounds) top = std::max(top, row.degree);
      std::vector<ExtInt> vals(top, ExtInt::infinity());
      for (const auto& row : b.bounds) {
        if (row.degree < 1) throw std::invalid_argument("custom block bound at degree 0");
        vals[row.degree - 1] = row.infinite ? ExtInt::infinity() : ExtInt::of(row.value);
      }
      // degrees beyond the declared rows are unknown, hence infinite
      return BoundTable(std::move(vals), ExtInt::infinity());
    }
  }
  throw std::logic_error("of_block: bad kind");
}

BoundTable BoundTable::of_construction(const Construction& c) {
  std::vector<BoundTable> tables;
  std::set<std::string> seen;
  std::function<void(const NodePtr&)> rec = [&](const NodePtr& n) {
    switch (n->type) {
      case ConstructionNode::Type::Leaf:
        if (seen.insert(n->block->id).second) tables.push_back(of_block(*n->block));
        break;
      case ConstructionNode::Type::FreeProduct:
        rec(n->left);
        rec(n->right);
        break;
      case ConstructionNode::Type::Extension:
        rec(n->left);
        break;
    }
  };
  rec(c.root());
  return sup(tables);
}

ExtInt f_bound(std::uint64_t e, unsigned m, const BoundTable& table) {
  if (m == 0) return ExtInt::of(0);
  ExtInt acc = ExtInt::of(0);
  std::uint64_t kmax = std::min<std::uint64_t>(e, m);
  // C(e, k) computed incrementally
  std::uint64_t binom = 1;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    ExtInt mm = table.value(m - static_cast<unsigned>(k));
    if (mm.inf) return ExtInt::infinity();
    acc = acc + mm * binom;
    if (k < kmax) binom = binom * (e - k) / (k + 1);
  }
  return acc;
}

ExtInt f_bound_recursive(std::uint64_t e, unsigned m, const BoundTable& table) {
  if (m == 0) return ExtInt::of(0);
  if (e == 0) return table.value(m);
  return f_bound_recursive(e - 1, m, table) + f_bound_recursive(e - 1, m - 1, table);
}

ExtInt construction_bound(const Construction& c, unsigned m, const BoundTable& table) {
  return f_bound(extension_rank(c), m, table);
}

ExtInt uniform_bound(const FiniteGroup& g, unsigned n, const BoundTable& table,
                     std::optional<unsigned> l_override, unsigned threads) {
  if (n < 2) throw std::invalid_argument("uniform_bound: n >= 2 required");
  for (unsigned m = 2; m <= n; ++m)
    if (!table.value(m).is_finite()) throw InfiniteTableError(m);
  unsigned l = l_override ? *l_override : l_value(g, threads);
  return f_bound(l, n, table);
}

std::uint64_t massey_symbol_bound(unsigned m, std::uint64_t p, MasseyMode mode, std::size_t cap,
                                  unsigned threads) {
  if (m < 2) throw std::invalid_argument("massey_symbol_bound: m >= 2 required");
  if (mode == MasseyMode::LemmaBound) return (std::uint64_t(m) * m) / 4 + m;
  FiniteGroup ubar = bar_unitriangular(m, p, cap);
  return 1 + l_value(ubar, threads);
}

} // namespace etsym
