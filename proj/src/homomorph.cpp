#include "etsym/homomorph.hpp"

#include <algorithm>
#include <functional>

namespace etsym {

unsigned default_precision(const FiniteGroup& g) {
  return std::max(1u, g.exponent_pow());
}

Hom make_hom(Construction domain, std::shared_ptr<const FiniteGroup> target,
             std::map<std::string, FiniteGroup::Elt> images) {
  if (!domain.valid()) throw std::invalid_argument("make_hom: invalid domain");
  if (!target) throw std::invalid_argument("make_hom: null target");
  if (target->p() != domain.p())
    throw std::invalid_argument("make_hom: target prime differs from construction prime");
  Hom h;
  h.domain = std::move(domain);
  h.target = std::move(target);
  h.precision = default_precision(*h.target);
  for (const auto& g : generators(h.domain)) {
    auto it = images.find(g.id);
    if (it == images.end())
      throw std::invalid_argument("make_hom: missing image for generator " + g.id);
    if (it->second >= h.target->order())
      throw std::invalid_argument("make_hom: image index out of range for " + g.id);
  }
  h.images = std::move(images);
  return h;
}

FiniteGroup::Elt evaluate(const Hom& rho, const Word& w) {
  FiniteGroup::Elt acc = FiniteGroup::kIdentity;
  for (const auto& l : w.letters) {
    auto it = rho.images.find(l.gen);
    if (it == rho.images.end())
      throw std::invalid_argument("evaluate: unknown generator " + l.gen);
    acc = rho.target->mul(acc, rho.target->pow(it->second, l.exp));
  }
  return acc;
}

std::vector<Violation> validate(const Hom& rho) {
  std::vector<Violation> out;
  for (const auto& rel : relations(rho.domain, rho.precision)) {
    auto v = evaluate(rho, rel.word);
    if (v != FiniteGroup::kIdentity) out.push_back({rel.description, v});
  }
  return out;
}

bool is_valid(const Hom& rho) { return validate(rho).empty(); }

std::vector<Subgroup> image_chain(const Hom& rho, const PrincipalTuple& t) {
  std::size_t r = t.rank();
  std::vector<Subgroup> chain;
  chain.reserve(r + 1);
  for (std::size_t j = 0; j <= r; ++j) {
    std::vector<FiniteGroup::Elt> gens;
    for (std::size_t i = j + 1; i <= r; ++i)
      gens.push_back(evaluate(rho, Word::letter(t.z_gen(i))));
    chain.push_back(subgroup_closure(*rho.target, gens));
  }
  return chain;
}

std::optional<std::size_t> find_collapse(const Hom& rho, const PrincipalTuple& t) {
  auto chain = image_chain(rho, t);
  for (std::size_t k = 0; k + 1 < chain.size(); ++k)
    if (chain[k].order() == chain[k + 1].order()) return k; // nested, so equal
  return std::nullopt;
}

AAutMatrix normalize_alpha(const Hom& rho, const PrincipalTuple& t, std::size_t k) {
  std::size_t r = t.rank();
  if (k < 1 || k > r) throw std::out_of_range("normalize_alpha: k out of range");
  std::vector<FiniteGroup::Elt> tail;
  for (std::size_t i = k + 1; i <= r; ++i)
    tail.push_back(evaluate(rho, Word::letter(t.z_gen(i))));
  FiniteGroup::Elt target = evaluate(rho, Word::letter(t.z_gen(k)));
  auto dlog = abelian_dlog(*rho.target, target, tail);
  if (!dlog)
    throw std::domain_error("normalize_alpha: rho(u_k) not in rho(V^k); k is not a collapse");
  ZmodMatrix m = ZmodMatrix::identity(r, rho.domain.p(), rho.precision);
  for (std::size_t i = k + 1; i <= r; ++i)
    m.set(i - 1, k - 1, -static_cast<std::int64_t>((*dlog)[i - k - 1]));
  return AAutMatrix(m);
}

Word alpha_column_word(const AAutMatrix& alpha, const PrincipalTuple& t, std::size_t k) {
  Word w;
  for (std::size_t j = k; j <= alpha.rank(); ++j) {
    std::uint64_t e = alpha.entry(j - 1, k - 1);
    if (e) w.letters.push_back({t.z_gen(j), static_cast<std::int64_t>(e)});
  }
  return w;
}

std::vector<std::uint64_t> abelianized_tuple_vector(const Word& w, const PrincipalTuple& t,
                                                    std::uint64_t p, unsigned precision) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 1; i <= t.rank(); ++i) pos[t.z_gen(i)] = i - 1;
  std::vector<Zmod> acc(t.rank(), Zmod(p, precision, 0));
  for (const auto& l : w.letters) {
    auto it = pos.find(l.gen);
    if (it == pos.end())
      throw std::invalid_argument("abelianized_tuple_vector: letter outside the tuple: " + l.gen);
    acc[it->second] = acc[it->second] + Zmod(p, precision, l.exp);
  }
  std::vector<std::uint64_t> out;
  out.reserve(acc.size());
  for (const auto& z : acc) out.push_back(z.residue());
  return out;
}

// ---------------------------------------------------------------------------
// Helpers for moving generator tables between constructions.

namespace {

Word map_word_paths(const Word& w, const std::function<std::string(const std::string&)>& f) {
  Word out;
  for (const auto& l : w.letters) {
    auto [path, name] = split_gen_id(l.gen);
    out.letters.push_back({make_gen_id(f(path), name), l.exp});
  }
  return out;
}

Word prefix_word(const Word& w, char prefix) {
  return map_word_paths(w, [&](const std::string& q) { return prefix + q; });
}

std::string strip_prefix(const std::string& s, char prefix) {
  if (s.empty() || s[0] != prefix)
    throw std::logic_error("strip_prefix: path does not start with expected label");
  return s.substr(1);
}

// Tuple of the factor containing the root (all tuple nodes sit inside it).
PrincipalTuple strip_tuple(const PrincipalTuple& t, char prefix) {
  PrincipalTuple out;
  out.root = strip_prefix(t.root, prefix);
  for (const auto& z : t.z_nodes) out.z_nodes.push_back(strip_prefix(z, prefix));
  return out;
}

// Tuple of the base of an extension: drops the outermost Z (the node itself).
PrincipalTuple tuple_into_base(const PrincipalTuple& t) {
  if (t.z_nodes.empty() || !t.z_nodes.back().empty())
    throw std::logic_error("tuple_into_base: outermost tuple node is not the root");
  PrincipalTuple out;
  out.root = strip_prefix(t.root, 'E');
  for (std::size_t i = 0; i + 1 < t.z_nodes.size(); ++i)
    out.z_nodes.push_back(strip_prefix(t.z_nodes[i], 'E'));
  return out;
}

Hom sub_hom(const Hom& rho, char prefix) {
  Hom h;
  h.domain = rho.domain.subtree(std::string(1, prefix));
  h.target = rho.target;
  h.precision = rho.precision;
  for (const auto& g : generators(h.domain)) {
    auto [path, name] = split_gen_id(g.id);
    h.images[g.id] = rho.images.at(make_gen_id(prefix + path, name));
  }
  return h;
}

} // namespace

// ---------------------------------------------------------------------------
// The eta morphism (extension-compatible embedding twisted by beta).

namespace {

struct EtaChecks {
  std::vector<std::size_t> kept; // 1-based tuple positions kept by the witness
};

EtaChecks eta_preconditions(const Construction& c, const WitnessPtr& w, const PrincipalTuple& t,
                            const AAutMatrix& beta) {
  if (!c.valid() || c.root()->type != ConstructionNode::Type::Extension)
    throw std::invalid_argument("eta_morphism: ambient construction must be an extension");
  std::size_t r = t.rank();
  if (r < 1 || beta.rank() != r)
    throw std::invalid_argument("eta_morphism: tuple/matrix rank mismatch");
  if (t.z_nodes.back() != "")
    throw std::invalid_argument("eta_morphism: tuple is not principal in the ambient extension");
  if (!to_sub_path(w, strip_prefix(t.root, 'E')))
    throw std::invalid_argument("eta_morphism: tuple not compatible with the subconstruction");
  // beta fixes Z_r pointwise
  for (std::size_t row = 1; row <= r; ++row)
    if (beta.entry(row - 1, r - 1) != (row == r ? 1u : 0u))
      throw std::invalid_argument("eta_morphism: beta does not fix Z_r");
  EtaChecks ch;
  for (std::size_t i = 1; i + 1 <= r; ++i)
    if (to_sub_path(w, strip_prefix(t.z_nodes[i - 1], 'E'))) ch.kept.push_back(i);
  // beta(z) = z mod Z_r on the kept coordinates
  for (std::size_t i : ch.kept)
    for (std::size_t row = 1; row <= r; ++row) {
      std::uint64_t want = (row == i) ? 1u : 0u;
      if (row != r && beta.entry(row - 1, i - 1) != want)
        throw std::invalid_argument("eta_morphism: beta not congruent to identity mod Z_r");
    }
  return ch;
}

using Table = std::map<std::string, Word>;

Table eta_build(const Construction& c, const WitnessPtr& w_full, const PrincipalTuple& t,
                const AAutMatrix& beta, unsigned precision, const std::vector<std::size_t>& kept);

// Dispatch on the shape of the projected construction, descending through the
// transparent witness steps (KeepLeft / KeepRight / DropExt).  `rebuild`
// reassembles a full-coordinate witness from a replacement at the focus.
Table eta_dispatch(const Construction& c, const WitnessPtr& w_full, const WitnessPtr& w,
                   const NodePtr& node, const std::string& q,
                   const std::function<WitnessPtr(WitnessPtr)>& rebuild, const PrincipalTuple& t,
                   const AAutMatrix& beta, unsigned precision,
                   const std::vector<std::size_t>& kept) {
  using K = WitnessNode::Kind;
  switch (w->kind) {
    case K::KeepLeft:
      return eta_dispatch(
          c, w_full, w->a, node->left, q + "L",
          [&](WitnessPtr x) { return rebuild(make_witness(K::KeepLeft, x)); }, t, beta,
          precision, kept);
    case K::KeepRight:
      return eta_dispatch(
          c, w_full, w->a, node->right, q + "R",
          [&](WitnessPtr x) { return rebuild(make_witness(K::KeepRight, x)); }, t, beta,
          precision, kept);
    case K::DropExt:
      return eta_dispatch(
          c, w_full, w->a, node->left, q + "E",
          [&](WitnessPtr x) { return rebuild(make_witness(K::DropExt, x)); }, t, beta, precision,
          kept);

    case K::Keep: {
      // dbar is a single building block: eta = iota
      Table out;
      for (std::size_t i = 0; i < node->block->gen_names.size(); ++i)
        out[make_gen_id("", node->block->gen_names[i])] =
            Word::letter(make_gen_id("E" + q, node->block->gen_names[i]));
      return out;
    }

    case K::KeepBoth: {
      // dbar = d1 * d2; the tuple is compatible with exactly the factor
      // containing the root leaf
      std::string root_cbar = strip_prefix(t.root, 'E');
      if (root_cbar.compare(0, q.size(), q) != 0)
        throw std::logic_error("eta_morphism: root left the witness trail");
      char side = root_cbar[q.size()];
      WitnessPtr w1 = (side == 'L') ? w->a : w->b;
      WitnessPtr w2 = (side == 'L') ? w->b : w->a;
      char other = (side == 'L') ? 'R' : 'L';
      // recurse on the compatible factor as a subconstruction of cbar
      WitnessPtr w_compat = rebuild(make_witness(side == 'L' ? K::KeepLeft : K::KeepRight, w1));
      Table inner = eta_build(c, w_compat, t, beta, precision, kept);
      Table out;
      for (auto& [id, word] : inner) {
        auto [path, name] = split_gen_id(id);
        out[make_gen_id(side + path, name)] = word;
      }
      // iota on the incompatible factor
      Construction sub2 = c.subtree("E" + q + other);
      Construction d2 = project_witness(w2, sub2);
      for (const auto& g : generators(d2)) {
        auto [path, name] = split_gen_id(g.id);
        out[make_gen_id(other + path, name)] =
            Word::letter(make_gen_id("E" + q + other + to_ambient_path(w2, path), name));
      }
      return out;
    }

    case K::KeepExt: {
      // dbar = <dbar'>: recurse with the ambient <dbar> and the selected
      // submatrix of beta, then push forward along iota_{<dbar>, c}
      std::size_t r = t.rank();
      if (kept.empty() || t.z_nodes[kept.back() - 1] != "E" + q)
        throw std::logic_error("eta_morphism: kept tuple positions out of sync");
      std::size_t ik = kept.back();

      Construction cbar = c.subtree("E");
      Construction dbar = project_witness(w_full, cbar);
      Construction c_new = Construction::extension(dbar);
      Construction dbar_prime = dbar.subtree("E");
      WitnessPtr w_next =
          make_witness(WitnessNode::Kind::DropExt, full_witness(dbar_prime));

      // principal tuple of <dbar> over the same root
      std::string root_in_dbar = *to_sub_path(w_full, strip_prefix(t.root, 'E'));
      PrincipalTuple t_new = principal_tuple_at(c_new, "E" + root_in_dbar);
      if (t_new.rank() != kept.size() + 1)
        throw std::logic_error("eta_morphism: restricted tuple rank mismatch");

      // submatrix of beta at the kept positions plus r
      std::vector<std::size_t> sel = kept;
      sel.push_back(r);
      ZmodMatrix msel(sel.size(), beta.prime(), beta.precision());
      for (std::size_t a = 0; a < sel.size(); ++a)
        for (std::size_t b = 0; b < sel.size(); ++b)
          msel.set(a, b, static_cast<std::int64_t>(beta.entry(sel[a] - 1, sel[b] - 1)));
      AAutMatrix beta_new{msel};

      GenWordMap eta_inner = eta_morphism(c_new, w_next, t_new, beta_new, precision);

      // iota_{<dbar>, c}: "" -> "", "E"+s -> "E" + ambient(s)
      auto push = [&](const std::string& path) -> std::string {
        if (path.empty()) return "";
        return "E" + to_ambient_path(w_full, strip_prefix(path, 'E'));
      };

      Table out;
      // z' = Z_{i_k}: image beta(u_{i_k}) = u_{i_k} * u_r^b
      {
        Word img = Word::letter(make_gen_id("E" + q, "z"));
        std::uint64_t b = beta.entry(r - 1, ik - 1);
        if (b) img.letters.push_back({make_gen_id("", "z"), static_cast<std::int64_t>(b)});
        out[make_gen_id("", "z")] = img;
      }
      for (const auto& [id, word] : eta_inner.table()) {
        auto [path, name] = split_gen_id(id);
        out[make_gen_id("E" + path, name)] = map_word_paths(word, push);
      }
      return out;
    }
  }
  throw std::logic_error("eta_morphism: bad witness node");
}

Table eta_build(const Construction& c, const WitnessPtr& w_full, const PrincipalTuple& t,
                const AAutMatrix& beta, unsigned precision,
                const std::vector<std::size_t>& kept) {
  return eta_dispatch(c, w_full, w_full, c.root()->left, "", [](WitnessPtr x) { return x; }, t,
                      beta, precision, kept);
}

} // namespace

GenWordMap eta_morphism(const Construction& c, const WitnessPtr& w, const PrincipalTuple& t,
                        const AAutMatrix& beta, unsigned precision) {
  EtaChecks ch = eta_preconditions(c, w, t, beta);
  Construction cbar = c.subtree("E");
  Construction d = project_witness(w, cbar);
  Table table = eta_build(c, w, t, beta, precision, ch.kept);
  return GenWordMap(d, c, std::move(table));
}

// ---------------------------------------------------------------------------
// Automorphism lifting.

GenWordMap extend_over_extension(const Construction& ext_domain, const GenWordMap& eta_bar,
                                 const Word& psi, unsigned precision) {
  if (ext_domain.root()->type != ConstructionNode::Type::Extension)
    throw std::invalid_argument("extend_over_extension: domain is not an extension");
  if (!eta_bar.domain().structurally_equal(ext_domain.subtree("E")))
    throw std::invalid_argument("extend_over_extension: eta_bar domain is not the base");
  // psi must land in Ker(theta)
  std::map<std::string, std::int64_t> cod_theta;
  for (const auto& g : generators(eta_bar.codomain())) cod_theta[g.id] = g.theta_raw;
  Zmod acc(ext_domain.p(), precision, 1);
  for (const auto& l : psi.letters) {
    auto it = cod_theta.find(l.gen);
    if (it == cod_theta.end())
      throw std::invalid_argument("extend_over_extension: psi letter outside codomain");
    acc = acc * Zmod(ext_domain.p(), precision, it->second).pow(l.exp);
  }
  if (!acc.is_one())
    throw std::invalid_argument("extend_over_extension: psi image is not theta-trivial");

  std::map<std::string, Word> table;
  table[make_gen_id("", "z")] = psi;
  for (const auto& [id, word] : eta_bar.table()) {
    auto [path, name] = split_gen_id(id);
    table[make_gen_id("E" + path, name)] = word;
  }
  return GenWordMap(ext_domain, eta_bar.codomain(), std::move(table));
}

GenWordMap lift_automorphism(const Construction& c, const PrincipalTuple& t,
                             const AAutMatrix& alpha, unsigned precision) {
  std::size_t r = t.rank();
  if (alpha.rank() != r) throw std::invalid_argument("lift_automorphism: rank mismatch");
  if (r == 0) return identity_map(c);

  const auto& node = c.root();
  if (node->type == ConstructionNode::Type::FreeProduct) {
    char side = t.root[0];
    Construction sub = c.subtree(std::string(1, side));
    GenWordMap inner = lift_automorphism(sub, strip_tuple(t, side), alpha, precision);
    std::map<std::string, Word> table;
    for (const auto& [id, word] : inner.table()) {
      auto [path, name] = split_gen_id(id);
      table[make_gen_id(side + path, name)] = prefix_word(word, side);
    }
    char other = (side == 'L') ? 'R' : 'L';
    for (const auto& g : generators(c.subtree(std::string(1, other)))) {
      auto [path, name] = split_gen_id(g.id);
      std::string full = make_gen_id(other + path, name);
      table[full] = Word::letter(full);
    }
    return GenWordMap(c, c, std::move(table));
  }

  if (node->type != ConstructionNode::Type::Extension)
    throw std::invalid_argument("lift_automorphism: tuple of positive rank at a leaf");
  if (t.z_nodes.back() != "")
    throw std::invalid_argument("lift_automorphism: tuple not principal in this construction");

  Construction cbar = c.subtree("E");
  PrincipalTuple tbar = tuple_into_base(t);
  GenWordMap gamma_bar = (r >= 2)
                             ? lift_automorphism(cbar, tbar, project_bar(alpha, r - 1), precision)
                             : identity_map(cbar);

  // gamma' = alpha|_{Z_r} semidirect gamma_bar
  std::map<std::string, Word> gp_table;
  gp_table[make_gen_id("", "z")] =
      Word::letter(make_gen_id("", "z"), static_cast<std::int64_t>(alpha.entry(r - 1, r - 1)));
  for (const auto& [id, word] : gamma_bar.table()) {
    auto [path, name] = split_gen_id(id);
    gp_table[make_gen_id("E" + path, name)] = prefix_word(word, 'E');
  }
  GenWordMap gamma_prime(c, c, std::move(gp_table));

  // alpha' = restriction of gamma' to the tuple subgroup: alpha with the last
  // row zeroed off-diagonal; beta = (alpha')^{-1} alpha
  ZmodMatrix ap = alpha.matrix();
  for (std::size_t j = 0; j + 1 < r; ++j) ap.set(r - 1, j, 0);
  AAutMatrix alpha_prime{ap};
  AAutMatrix beta = compose(invert(alpha_prime), alpha);

  GenWordMap eta_bar = eta_morphism(c, full_witness(cbar), t, beta, precision);
  GenWordMap eta = extend_over_extension(c, eta_bar, Word::letter(make_gen_id("", "z")),
                                         precision);
  return compose_maps(gamma_prime, eta);
}

// ---------------------------------------------------------------------------
// Factoring through subconstructions.

namespace {

std::pair<WitnessPtr, Hom> qf_descend(const Hom& rho, const PrincipalTuple& t, std::size_t l) {
  const auto& node = rho.domain.root();
  std::size_t r = t.rank();

  if (node->type == ConstructionNode::Type::Extension) {
    if (l == r) {
      // drop this extension wrapper
      Construction cbar = rho.domain.subtree("E");
      Hom h = sub_hom(rho, 'E');
      return {make_witness(WitnessNode::Kind::DropExt, full_witness(cbar)), std::move(h)};
    }
    Hom rho_bar = sub_hom(rho, 'E');
    auto [w_bar, rho_bar2] = qf_descend(rho_bar, tuple_into_base(t), l);
    Construction sub = Construction::extension(rho_bar2.domain);
    Hom h;
    h.domain = sub;
    h.target = rho.target;
    h.precision = rho.precision;
    std::string z_id = make_gen_id("", "z");
    FiniteGroup::Elt z_img = rho.images.at(z_id);
    h.images[z_id] = z_img;
    for (const auto& [id, img] : rho_bar2.images) {
      auto [path, name] = split_gen_id(id);
      h.images[make_gen_id("E" + path, name)] = img;
    }
    // well-definedness of the re-extended map: conjugation by every base
    // generator must still act by theta in the target
    const FiniteGroup& g = *rho.target;
    for (const auto& gen : generators(rho_bar2.domain)) {
      FiniteGroup::Elt x = rho_bar2.images.at(gen.id);
      std::int64_t tpow = static_cast<std::int64_t>(
          theta_value(gen, rho.domain.p(), rho.precision).residue());
      if (g.mul(g.mul(x, z_img), g.inv(x)) != g.pow(z_img, tpow))
        throw std::domain_error("quotient_factor: conjugation relation fails in the target "
                                "(invalid input homomorphism)");
    }
    return {make_witness(WitnessNode::Kind::KeepExt, w_bar), std::move(h)};
  }

  if (node->type == ConstructionNode::Type::FreeProduct) {
    char side = t.root[0];
    char other = (side == 'L') ? 'R' : 'L';
    Hom rho_side = sub_hom(rho, side);
    auto [w_side, rho_side2] = qf_descend(rho_side, strip_tuple(t, side), l);
    Construction other_sub = rho.domain.subtree(std::string(1, other));
    if (rho_side2.domain.is_trivial_leaf()) {
      // the factor collapsed to the trivial pair; keep only the other factor
      Hom h = sub_hom(rho, other);
      auto kind = (other == 'L') ? WitnessNode::Kind::KeepLeft : WitnessNode::Kind::KeepRight;
      return {make_witness(kind, full_witness(other_sub)), std::move(h)};
    }
    Construction sub = (side == 'L')
                           ? Construction::free_product(rho_side2.domain, other_sub)
                           : Construction::free_product(other_sub, rho_side2.domain);
    Hom h;
    h.domain = sub;
    h.target = rho.target;
    h.precision = rho.precision;
    for (const auto& [id, img] : rho_side2.images) {
      auto [path, name] = split_gen_id(id);
      h.images[make_gen_id(side + path, name)] = img;
    }
    for (const auto& g : generators(other_sub)) {
      auto [path, name] = split_gen_id(g.id);
      h.images[make_gen_id(other + path, name)] = rho.images.at(make_gen_id(other + path, name));
    }
    WitnessPtr w = (side == 'L')
                       ? make_witness(WitnessNode::Kind::KeepBoth, w_side, full_witness(other_sub))
                       : make_witness(WitnessNode::Kind::KeepBoth, full_witness(other_sub), w_side);
    return {w, std::move(h)};
  }

  throw std::logic_error("quotient_factor: descended into a leaf");
}

} // namespace

std::pair<WitnessPtr, Hom> quotient_factor(const Hom& rho, const PrincipalTuple& t,
                                           std::size_t l) {
  if (l < 1 || l > t.rank()) throw std::out_of_range("quotient_factor: l out of range");
  if (evaluate(rho, Word::letter(t.z_gen(l))) != FiniteGroup::kIdentity)
    return {full_witness(rho.domain), rho};
  return qf_descend(rho, t, l);
}

FactorStage factor_once(const Hom& rho, const PrincipalTuple& t, std::size_t k) {
  FactorStage stage(normalize_alpha(rho, t, k + 1));
  stage.tuple = t;
  stage.collapse_k = k;
  stage.gamma = lift_automorphism(rho.domain, t, stage.alpha, rho.precision);

  Hom rho2;
  rho2.domain = rho.domain;
  rho2.target = rho.target;
  rho2.precision = rho.precision;
  for (const auto& [id, word] : stage.gamma.table()) rho2.images[id] = evaluate(rho, word);

  if (evaluate(rho2, Word::letter(t.z_gen(k + 1))) != FiniteGroup::kIdentity)
    throw std::logic_error("factor_once: normalization failed to kill Z_{k+1}");

  auto [w, h] = quotient_factor(rho2, t, k + 1);
  if (is_full_witness(w))
    throw std::logic_error("factor_once: quotient did not shrink the construction");
  stage.witness = w;
  stage.sub = h.domain;
  stage.rho2 = std::move(h);
  return stage;
}

FactorizationCertificate factor_full(const Hom& rho, std::optional<unsigned> l_override,
                                     unsigned threads) {
  FactorizationCertificate cert;
  cert.initial = rho;
  cert.l_bound = l_override ? *l_override : l_value(*rho.target, threads);

  std::size_t ext_nodes = 0;
  for (const auto& g : generators(rho.domain))
    if (g.is_extension) ++ext_nodes;

  Hom cur = rho;
  while (extension_rank(cur.domain) > cert.l_bound) {
    if (cert.stages.size() > ext_nodes)
      throw std::logic_error("factor_full: stage bound exceeded");
    std::size_t e = extension_rank(cur.domain);
    auto tuples = principal_tuples(cur.domain);
    const PrincipalTuple* pick = nullptr;
    for (const auto& t : tuples)
      if (t.rank() == e) {
        pick = &t;
        break;
      }
    if (!pick) throw std::logic_error("factor_full: no tuple of maximal rank");
    auto k = find_collapse(cur, *pick);
    if (!k)
      throw std::logic_error("factor_full: no collapse although the rank exceeds l(target)");
    cert.stages.push_back(factor_once(cur, *pick, *k));
    cur = cert.stages.back().rho2;
  }
  cert.final = std::move(cur);
  return cert;
}

std::optional<std::string> check_certificate(const FactorizationCertificate& cert) {
  try {
    if (!validate(cert.initial).empty()) return "initial homomorphism violates relations";
    const Hom* cur = &cert.initial;
    for (std::size_t si = 0; si < cert.stages.size(); ++si) {
      const FactorStage& st = cert.stages[si];
      std::string where = "stage " + std::to_string(si) + ": ";
      std::size_t r = st.tuple.rank();

      PrincipalTuple expect = principal_tuple_at(cur->domain, st.tuple.root);
      if (expect.z_nodes != st.tuple.z_nodes) return where + "tuple does not match the domain";
      if (st.collapse_k + 1 > r) return where + "collapse index out of range";
      if (st.alpha.rank() != r || st.alpha.prime() != cur->domain.p() ||
          st.alpha.precision() != cur->precision)
        return where + "alpha has wrong shape";
      // alpha is a single-column normalization at k+1
      for (std::size_t j = 1; j <= r; ++j) {
        if (j == st.collapse_k + 1) continue;
        for (std::size_t i = 1; i <= r; ++i)
          if (st.alpha.entry(i - 1, j - 1) != (i == j ? 1u : 0u))
            return where + "alpha moves a column other than the collapse column";
      }
      if (st.alpha.entry(st.collapse_k, st.collapse_k) != 1)
        return where + "alpha does not fix Z_{k+1} mod V^{k+1}";

      if (!st.gamma.domain().structurally_equal(cur->domain) ||
          !st.gamma.codomain().structurally_equal(cur->domain))
        return where + "gamma is not an endomap of the stage domain";
      if (!st.gamma.theta_compatible(cur->precision))
        return where + "gamma is not theta-compatible";
      for (std::size_t j = 1; j <= r; ++j) {
        auto vec = abelianized_tuple_vector(st.gamma.image(st.tuple.z_gen(j)), st.tuple,
                                            cur->domain.p(), cur->precision);
        for (std::size_t i = 1; i <= r; ++i)
          if (vec[i - 1] != st.alpha.entry(i - 1, j - 1))
            return where + "gamma does not restrict to alpha on the tuple";
      }
      if (evaluate(*cur, st.gamma.image(st.tuple.z_gen(st.collapse_k + 1))) !=
          FiniteGroup::kIdentity)
        return where + "normalized image of Z_{k+1} is not killed";

      Construction proj = project_witness(st.witness, cur->domain);
      if (!proj.structurally_equal(st.sub)) return where + "witness does not project to c''";
      if (proj.structurally_equal(cur->domain)) return where + "subconstruction is not proper";
      if (!st.rho2.domain.structurally_equal(st.sub)) return where + "rho'' domain mismatch";
      if (st.rho2.target->order() != cur->target->order() ||
          st.rho2.target->p() != cur->target->p())
        return where + "rho'' target mismatch";
      if (!validate(st.rho2).empty()) return where + "rho'' violates relations";

      GenWordMap projection = pi(st.witness, cur->domain);
      for (const auto& g : generators(cur->domain)) {
        auto lhs = evaluate(*cur, st.gamma.image(g.id));
        auto rhs = evaluate(st.rho2, projection.image(g.id));
        if (lhs != rhs)
          return where + "stagewise identity fails on generator " + g.id;
      }
      cur = &st.rho2;
    }
    if (!cert.final.domain.structurally_equal(cur->domain))
      return "final construction differs from the last stage";
    if (cert.final.images != cur->images) return "final images differ from the last stage";
    if (extension_rank(cert.final.domain) > cert.l_bound)
      return "final extension rank exceeds the l bound";
    unsigned l_exact = l_value(*cert.initial.target);
    if (l_exact != cert.l_bound) return "recorded l value does not match the target group";
  } catch (const std::exception& e) {
    return std::string("certificate check raised: ") + e.what();
  }
  return std::nullopt;
}

} // namespace etsym
