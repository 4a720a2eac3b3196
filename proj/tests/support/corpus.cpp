#include "support/corpus.hpp"

#include <algorithm>
#include <functional>

namespace etsym::testsupport {

BlockRegistry standard_registry(std::uint64_t p) {
  BlockRegistry reg;
  reg.add(trivial_block("T", p));
  reg.add(free_procyclic_block("F", p, 1 + static_cast<std::int64_t>(p)));
  reg.add(demushkin2_block("D", p));
  if (p == 2) reg.add(sign_block("S"));
  return reg;
}

Construction parse_std(const std::string& text, std::uint64_t p) {
  BlockRegistry reg = standard_registry(p);
  return parse_construction(text, reg);
}

Construction random_construction(std::mt19937_64& rng, const BlockRegistry& reg,
                                 std::size_t max_rank, std::size_t max_leaves) {
  std::function<Construction(std::size_t, std::size_t, bool)> gen =
      [&](std::size_t rank_budget, std::size_t leaf_budget,
          bool allow_trivial) -> Construction {
    std::uint64_t roll = rng() % 10;
    if (leaf_budget <= 1 || roll < 4) {
      std::vector<std::string> ids = allow_trivial
                                         ? std::vector<std::string>{"T", "F", "D"}
                                         : std::vector<std::string>{"F", "D"};
      return Construction::leaf(reg.get(ids[rng() % ids.size()]));
    }
    if (roll < 7 && rank_budget > 0) {
      return Construction::extension(gen(rank_budget - 1, leaf_budget, true));
    }
    std::size_t half = std::max<std::size_t>(1, leaf_budget / 2);
    Construction a = gen(rank_budget, half, false);
    Construction b = gen(rank_budget, leaf_budget - half, false);
    return Construction::free_product(a, b);
  };
  return gen(max_rank, std::max<std::size_t>(1, max_leaves), true);
}

Hom random_valid_hom(std::mt19937_64& rng, const Construction& c,
                     std::shared_ptr<const FiniteGroup> target) {
  const FiniteGroup& g = *target;
  unsigned precision = default_precision(g);
  std::map<std::string, FiniteGroup::Elt> images;

  std::function<void(const NodePtr&, const std::string&)> walk = [&](const NodePtr& n,
                                                                     const std::string& path) {
    switch (n->type) {
      case ConstructionNode::Type::Leaf: {
        const BlockSpec& b = *n->block;
        if (b.gen_names.empty()) return;
        // rejection-sample block images against the block relations; fall
        // back to the identity assignment, which always satisfies them
        for (int attempt = 0;; ++attempt) {
          std::map<std::string, FiniteGroup::Elt> trial;
          for (const auto& name : b.gen_names)
            trial[name] = attempt < 512 ? static_cast<FiniteGroup::Elt>(rng() % g.order())
                                        : FiniteGroup::kIdentity;
          bool ok = true;
          for (const auto& rel : b.relations) {
            FiniteGroup::Elt acc = FiniteGroup::kIdentity;
            for (const auto& l : rel.letters) acc = g.mul(acc, g.pow(trial.at(l.gen), l.exp));
            if (acc != FiniteGroup::kIdentity) {
              ok = false;
              break;
            }
          }
          if (ok) {
            for (const auto& [name, img] : trial) images[make_gen_id(path, name)] = img;
            return;
          }
        }
      }
      case ConstructionNode::Type::FreeProduct:
        walk(n->left, path + "L");
        walk(n->right, path + "R");
        return;
      case ConstructionNode::Type::Extension: {
        walk(n->left, path + "E");
        // candidates for z: elements on which every base image acts by theta
        std::string inner = path + "E";
        std::vector<std::pair<FiniteGroup::Elt, std::int64_t>> actions;
        for (const auto& gen : generators(c)) {
          if (gen.node_path.compare(0, inner.size(), inner) != 0) continue;
          actions.emplace_back(
              images.at(gen.id),
              static_cast<std::int64_t>(theta_value(gen, c.p(), precision).residue()));
        }
        std::vector<FiniteGroup::Elt> ok;
        for (FiniteGroup::Elt z = 0; z < g.order(); ++z) {
          bool good = true;
          for (const auto& [x, t] : actions) {
            if (g.mul(g.mul(x, z), g.inv(x)) != g.pow(z, t)) {
              good = false;
              break;
            }
          }
          if (good) ok.push_back(z);
        }
        images[make_gen_id(path, "z")] = ok[rng() % ok.size()];
        return;
      }
    }
  };
  walk(c.root(), "");
  return make_hom(c, std::move(target), std::move(images));
}

} // namespace etsym::testsupport
