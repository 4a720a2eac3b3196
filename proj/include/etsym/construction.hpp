#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etsym/padic.hpp"
#include "etsym/word.hpp"

namespace etsym {

enum class BlockKind { Trivial, FreeProCyclic, SignOfOrderTwo, Demushkin, Custom };

std::string block_kind_name(BlockKind k);

// Declared per-degree symbol-length supremum of a custom block.
struct DeclaredBound {
  unsigned degree = 0;
  std::uint64_t value = 0;
  bool infinite = false;
};

// User-supplied degree <= 2 cohomology data for custom blocks (p odd).
struct CustomRing {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  // cup[i][j] is a vector in F_p^{d2}; must be alternating.
  std::vector<std::vector<std::vector<std::uint8_t>>> cup;
};

struct BlockSpec {
  std::string id;
  BlockKind kind = BlockKind::Trivial;
  std::uint64_t p = 2;
  std::vector<std::string> gen_names;
  // Raw theta values, one per generator, interpreted mod p^N at use sites.
  std::vector<std::int64_t> theta;
  // Relation words over the bare generator names.
  std::vector<Word> relations;
  std::vector<DeclaredBound> bounds; // custom blocks only
  std::optional<CustomRing> ring;    // custom blocks only
};

// Throws std::invalid_argument on malformed specs (theta not a principal
// unit, sign block with odd p, name clashes, ...).
void validate_block(const BlockSpec& b);

BlockSpec trivial_block(std::string id, std::uint64_t p);
BlockSpec free_procyclic_block(std::string id, std::uint64_t p, std::int64_t theta);
BlockSpec sign_block(std::string id); // p = 2, theta(e) = -1
// Two-generator Demushkin presentation x^p [x, y] with theta = (1, 1+p)
// (theta(x)^2 = 1 forces theta(x) = -1 when p = 2).
BlockSpec demushkin2_block(std::string id, std::uint64_t p);

using BlockPtr = std::shared_ptr<const BlockSpec>;

class BlockRegistry {
 public:
  void add(BlockSpec b);
  BlockPtr find(const std::string& id) const; // nullptr if absent
  BlockPtr get(const std::string& id) const;  // throws if absent
  const std::map<std::string, BlockPtr>& all() const { return blocks_; }

 private:
  std::map<std::string, BlockPtr> blocks_;
};

// ---------------------------------------------------------------------------
// Construction ASTs.  Nodes are addressed by occurrence paths: strings over
// {L, R, E} from the root ("" = root, FreeProduct children L/R, Extension
// base E).

struct ConstructionNode;
using NodePtr = std::shared_ptr<const ConstructionNode>;

struct ConstructionNode {
  enum class Type { Leaf, FreeProduct, Extension };
  Type type = Type::Leaf;
  BlockPtr block;   // Leaf
  NodePtr left;     // FreeProduct left / Extension base
  NodePtr right;    // FreeProduct right
};

class Construction {
 public:
  Construction() = default;

  static Construction leaf(BlockPtr block);
  static Construction free_product(const Construction& a, const Construction& b);
  static Construction extension(const Construction& base);

  bool valid() const { return root_ != nullptr; }
  const NodePtr& root() const { return root_; }
  std::uint64_t p() const { return p_; }

  const ConstructionNode* node_at(const std::string& path) const; // throws on bad path
  Construction subtree(const std::string& path) const;
  bool is_trivial_leaf() const;

  std::string print() const;
  bool structurally_equal(const Construction& o) const;

 private:
  Construction(NodePtr root, std::uint64_t p) : root_(std::move(root)), p_(p) {}
  NodePtr root_;
  std::uint64_t p_ = 0;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t position, const std::string& msg)
      : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
        pos(position) {}
  std::size_t pos;
};

// Grammar: c := ID | "(" c "*" c ")" | "<" c ">", whitespace-insensitive.
Construction parse_construction(const std::string& text, const BlockRegistry& registry);

// ---------------------------------------------------------------------------
// Generators and relations.

std::string make_gen_id(const std::string& node_path, const std::string& name);
std::pair<std::string, std::string> split_gen_id(const std::string& id);

struct Generator {
  std::string id;
  std::string node_path;
  bool is_extension = false;     // one generator per Extension node
  std::size_t block_gen_index = 0;
  std::int64_t theta_raw = 1;    // always 1 for extension generators
};

// Deterministic preorder: at an Extension node its own generator comes first,
// then the base; FreeProduct lists left then right; leaves list the block
// generators in declaration order.
std::vector<Generator> generators(const Construction& c);
PrincipalUnit theta_value(const Generator& g, std::uint64_t p, unsigned precision);

struct RelationCheck {
  Word word; // must evaluate to the identity
  std::string description;
};

// Block relations plus, for every Extension node with generator z and every
// generator g strictly inside its base, the record g z g^-1 z^-theta(g).
std::vector<RelationCheck> relations(const Construction& c, unsigned precision);

// ---------------------------------------------------------------------------
// Subconstruction witnesses.  A witness is a derivation aligned with the AST;
// two witnesses may project to the same expression but are distinct objects
// carrying distinct iota/pi maps.

struct WitnessNode;
using WitnessPtr = std::shared_ptr<const WitnessNode>;

struct WitnessNode {
  enum class Kind { Keep, KeepBoth, KeepLeft, KeepRight, KeepExt, DropExt };
  Kind kind = Kind::Keep;
  WitnessPtr a; // KeepBoth left / unary child
  WitnessPtr b; // KeepBoth right
};

WitnessPtr make_witness(WitnessNode::Kind kind, WitnessPtr a = nullptr, WitnessPtr b = nullptr);
WitnessPtr full_witness(const Construction& c);
bool is_full_witness(const WitnessPtr& w);

Construction project_witness(const WitnessPtr& w, const Construction& c);
bool projects_trivial(const WitnessPtr& w, const NodePtr& node);

// Enumerates every witness exactly once; the visitor returns false to stop.
void for_each_witness(const Construction& c, const std::function<bool(const WitnessPtr&)>& fn);
std::vector<WitnessPtr> enumerate_witnesses(const Construction& c, std::size_t cap = 1u << 20);

// total / trivially-projecting witness counts without enumeration.
std::pair<std::uint64_t, std::uint64_t> count_subconstructions(const Construction& c);

// Node correspondence along a witness.  to_sub_path returns the path in the
// projected construction of a kept ambient node (nullopt if dropped);
// to_ambient_path is total on the projected construction's nodes.
std::optional<std::string> to_sub_path(const WitnessPtr& w, const std::string& ambient_path);
std::string to_ambient_path(const WitnessPtr& w, const std::string& sub_path);

// Witness for d' <= c obtained from d' <= d <= c.
WitnessPtr compose_witness(const WitnessPtr& outer, const WitnessPtr& inner);

std::string witness_to_string(const WitnessPtr& w);
WitnessPtr witness_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Generator -> word maps between constructions.

class GenWordMap {
 public:
  GenWordMap() = default;
  GenWordMap(Construction domain, Construction codomain, std::map<std::string, Word> table)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), table_(std::move(table)) {}

  const Construction& domain() const { return domain_; }
  const Construction& codomain() const { return codomain_; }
  const std::map<std::string, Word>& table() const { return table_; }
  const Word& image(const std::string& gen_id) const;

  // theta(image word) == theta(generator) mod p^N for every generator.
  // Holds for iota, eta and lifted automorphisms; projections pi kill
  // generators with nontrivial theta and are exempt.
  bool theta_compatible(unsigned precision) const;

 private:
  Construction domain_;
  Construction codomain_;
  std::map<std::string, Word> table_;
};

GenWordMap identity_map(const Construction& c);
// Natural monomorphism G(d) -> G(c) for a witness of d <= c.
GenWordMap iota(const WitnessPtr& w, const Construction& c);
// Natural projection G(c) ->> G(d); dropped generators map to the empty word.
GenWordMap pi(const WitnessPtr& w, const Construction& c);
// g |-> outer(inner(g)).
GenWordMap compose_maps(const GenWordMap& outer, const GenWordMap& inner);

// ---------------------------------------------------------------------------
// Principal tuples and the extension rank.

struct PrincipalTuple {
  std::string root;                 // path of a leaf
  std::vector<std::string> z_nodes; // Extension ancestors, innermost first

  std::size_t rank() const { return z_nodes.size(); }
  // Generator id of Z_i (1-based; Z_1 is innermost).
  std::string z_gen(std::size_t i) const { return make_gen_id(z_nodes.at(i - 1), "z"); }
};

// One tuple per leaf, leaves in DFS order; z_nodes are exactly the Extension
// ancestors of the root, innermost first.
std::vector<PrincipalTuple> principal_tuples(const Construction& c);
// Same set computed by the inductive rules (test oracle).
std::vector<PrincipalTuple> principal_tuples_inductive(const Construction& c);
PrincipalTuple principal_tuple_at(const Construction& c, const std::string& leaf_path);

std::size_t extension_rank(const Construction& c);
std::size_t extension_rank_recursive(const Construction& c); // test oracle

// True iff the derivation w keeps the tuple's root leaf.
bool compatible(const PrincipalTuple& t, const WitnessPtr& w);
// Clause-by-clause recursive definition (test oracle).
bool compatible_inductive(const PrincipalTuple& t, const WitnessPtr& w, const Construction& c);

// Subsequence of z_nodes kept by w, rewritten in the subconstruction's
// coordinates; requires compatible(t, w).
PrincipalTuple restrict_tuple(const PrincipalTuple& t, const WitnessPtr& w);

} // namespace etsym
