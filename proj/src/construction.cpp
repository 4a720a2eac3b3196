#include "etsym/construction.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace etsym {

std::string block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::Trivial: return "trivial";
    case BlockKind::FreeProCyclic: return "free_procyclic";
    case BlockKind::SignOfOrderTwo: return "sign";
    case BlockKind::Demushkin: return "demushkin";
    case BlockKind::Custom: return "custom";
  }
  return "?";
}

namespace {

bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

} // namespace

void validate_block(const BlockSpec& b) {
  if (b.id.empty()) throw std::invalid_argument("block: empty id");
  if (!is_prime(b.p)) throw std::invalid_argument("block " + b.id + ": p is not prime");
  if (b.gen_names.size() != b.theta.size())
    throw std::invalid_argument("block " + b.id + ": theta size != generator count");
  for (const auto& n : b.gen_names) {
    if (n.empty() || n.find(':') != std::string::npos)
      throw std::invalid_argument("block " + b.id + ": bad generator name");
    if (std::count(b.gen_names.begin(), b.gen_names.end(), n) != 1)
      throw std::invalid_argument("block " + b.id + ": duplicate generator name " + n);
  }
  for (std::int64_t t : b.theta) {
    // principal unit check at the weakest precision; use-site precisions refine it
    if (!Zmod(b.p, 1, t).is_principal_unit())
      throw std::invalid_argument("block " + b.id + ": theta value not a principal unit");
  }
  for (const auto& rel : b.relations)
    for (const auto& l : rel.letters)
      if (std::find(b.gen_names.begin(), b.gen_names.end(), l.gen) == b.gen_names.end())
        throw std::invalid_argument("block " + b.id + ": relation uses unknown generator " + l.gen);
  switch (b.kind) {
    case BlockKind::Trivial:
      if (!b.gen_names.empty()) throw std::invalid_argument("trivial block with generators");
      break;
    case BlockKind::FreeProCyclic:
      if (b.gen_names.size() != 1 || !b.relations.empty())
        throw std::invalid_argument("free procyclic block needs 1 generator, no relations");
      break;
    case BlockKind::SignOfOrderTwo: {
      if (b.p != 2) throw std::invalid_argument("sign block requires p = 2");
      if (b.gen_names.size() != 1 || b.relations.size() != 1)
        throw std::invalid_argument("sign block needs 1 generator and the order-2 relation");
      if (Zmod(2, 2, b.theta[0]).residue() != 3)
        throw std::invalid_argument("sign block theta must be -1");
      break;
    }
    case BlockKind::Demushkin:
      if (b.gen_names.empty() || b.relations.size() != 1)
        throw std::invalid_argument("demushkin block needs a presentation with one relation");
      break;
    case BlockKind::Custom:
      break;
  }
}

BlockSpec trivial_block(std::string id, std::uint64_t p) {
  BlockSpec b;
  b.id = std::move(id);
  b.kind = BlockKind::Trivial;
  b.p = p;
  validate_block(b);
  return b;
}

BlockSpec free_procyclic_block(std::string id, std::uint64_t p, std::int64_t theta) {
  BlockSpec b;
  b.id = std::move(id);
  b.kind = BlockKind::FreeProCyclic;
  b.p = p;
  b.gen_names = {"x"};
  b.theta = {theta};
  validate_block(b);
  return b;
}

BlockSpec sign_block(std::string id) {
  BlockSpec b;
  b.id = std::move(id);
  b.kind = BlockKind::SignOfOrderTwo;
  b.p = 2;
  b.gen_names = {"e"};
  b.theta = {-1};
  b.relations = {Word::letter("e", 2)};
  validate_block(b);
  return b;
}

BlockSpec demushkin2_block(std::string id, std::uint64_t p) {
  BlockSpec b;
  b.id = std::move(id);
  b.kind = BlockKind::Demushkin;
  b.p = p;
  b.gen_names = {"x", "y"};
  // theta must kill the relation: theta(x)^p * theta([x,y]) = theta(x)^p = 1.
  b.theta = {1, 1 + static_cast<std::int64_t>(p)};
  Word rel;
  rel.letters = {{"x", static_cast<std::int64_t>(p) + 1}, {"y", 1}, {"x", -1}, {"y", -1}};
  b.relations = {rel};
  validate_block(b);
  return b;
}

void BlockRegistry::add(BlockSpec b) {
  validate_block(b);
  auto id = b.id;
  if (blocks_.count(id)) throw std::invalid_argument("registry: duplicate block id " + id);
  blocks_[id] = std::make_shared<const BlockSpec>(std::move(b));
}

BlockPtr BlockRegistry::find(const std::string& id) const {
  auto it = blocks_.find(id);
  return it == blocks_.end() ? nullptr : it->second;
}

BlockPtr BlockRegistry::get(const std::string& id) const {
  auto b = find(id);
  if (!b) throw std::invalid_argument("registry: unknown block id " + id);
  return b;
}

// ---------------------------------------------------------------------------

Construction Construction::leaf(BlockPtr block) {
  if (!block) throw std::invalid_argument("Construction::leaf: null block");
  auto n = std::make_shared<ConstructionNode>();
  n->type = ConstructionNode::Type::Leaf;
  n->block = block;
  return Construction(n, block->p);
}

Construction Construction::free_product(const Construction& a, const Construction& b) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("free_product: invalid operand");
  if (a.p() != b.p()) throw std::invalid_argument("free_product: prime mismatch");
  if (a.is_trivial_leaf() || b.is_trivial_leaf())
    throw std::invalid_argument("free_product: operand is the trivial pair");
  auto n = std::make_shared<ConstructionNode>();
  n->type = ConstructionNode::Type::FreeProduct;
  n->left = a.root();
  n->right = b.root();
  return Construction(n, a.p());
}

Construction Construction::extension(const Construction& base) {
  if (!base.valid()) throw std::invalid_argument("extension: invalid base");
  auto n = std::make_shared<ConstructionNode>();
  n->type = ConstructionNode::Type::Extension;
  n->left = base.root();
  return Construction(n, base.p());
}

namespace {

NodePtr walk(const NodePtr& root, const std::string& path) {
  NodePtr cur = root;
  for (char c : path) {
    if (!cur) break;
    switch (c) {
      case 'L':
        cur = cur->type == ConstructionNode::Type::FreeProduct ? cur->left : nullptr;
        break;
      case 'R':
        cur = cur->type == ConstructionNode::Type::FreeProduct ? cur->right : nullptr;
        break;
      case 'E':
        cur = cur->type == ConstructionNode::Type::Extension ? cur->left : nullptr;
        break;
      default:
        cur = nullptr;
    }
  }
  if (!cur) throw std::out_of_range("construction: bad node path '" + path + "'");
  return cur;
}

void print_node(const NodePtr& n, std::ostream& os) {
  switch (n->type) {
    case ConstructionNode::Type::Leaf:
      os << n->block->id;
      break;
    case ConstructionNode::Type::FreeProduct:
      os << "(";
      print_node(n->left, os);
      os << " * ";
      print_node(n->right, os);
      os << ")";
      break;
    case ConstructionNode::Type::Extension:
      os << "<";
      print_node(n->left, os);
      os << ">";
      break;
  }
}

bool nodes_equal(const NodePtr& a, const NodePtr& b) {
  if (a->type != b->type) return false;
  switch (a->type) {
    case ConstructionNode::Type::Leaf:
      return a->block->id == b->block->id && a->block->p == b->block->p;
    case ConstructionNode::Type::FreeProduct:
      return nodes_equal(a->left, b->left) && nodes_equal(a->right, b->right);
    case ConstructionNode::Type::Extension:
      return nodes_equal(a->left, b->left);
  }
  return false;
}

} // namespace

const ConstructionNode* Construction::node_at(const std::string& path) const {
  return walk(root_, path).get();
}

Construction Construction::subtree(const std::string& path) const {
  return Construction(walk(root_, path), p_);
}

bool Construction::is_trivial_leaf() const {
  return root_ && root_->type == ConstructionNode::Type::Leaf &&
         root_->block->kind == BlockKind::Trivial;
}

std::string Construction::print() const {
  if (!root_) return "";
  std::ostringstream os;
  print_node(root_, os);
  return os.str();
}

bool Construction::structurally_equal(const Construction& o) const {
  if (!root_ || !o.root_) return root_ == o.root_;
  return p_ == o.p_ && nodes_equal(root_, o.root_);
}

// ---------------------------------------------------------------------------
// Parser.

namespace {

class Parser {
 public:
  Parser(const std::string& text, const BlockRegistry& reg) : s_(text), reg_(reg) {}

  Construction run() {
    Construction c = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(pos_, "trailing input");
    return c;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  void expect(char c, const char* what) {
    if (peek() != c) throw ParseError(pos_, std::string("expected ") + what);
    ++pos_;
  }

  Construction expr() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      std::size_t lpos = pos_;
      Construction a = expr();
      expect('*', "'*'");
      std::size_t rpos = pos_;
      Construction b = expr();
      expect(')', "')'");
      if (a.is_trivial_leaf()) throw ParseError(lpos, "trivial pair as free product operand");
      if (b.is_trivial_leaf()) throw ParseError(rpos, "trivial pair as free product operand");
      return Construction::free_product(a, b);
    }
    if (c == '<') {
      ++pos_;
      Construction a = expr();
      expect('>', "'>'");
      return Construction::extension(a);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      BlockPtr b = reg_.find(id);
      if (!b) throw ParseError(start, "unknown block id '" + id + "'");
      return Construction::leaf(b);
    }
    throw ParseError(pos_, "expected block id, '(' or '<'");
  }

  const std::string& s_;
  const BlockRegistry& reg_;
  std::size_t pos_ = 0;
};

} // namespace

Construction parse_construction(const std::string& text, const BlockRegistry& registry) {
  return Parser(text, registry).run();
}

// ---------------------------------------------------------------------------
// Generators and relations.

std::string make_gen_id(const std::string& node_path, const std::string& name) {
  return node_path + ":" + name;
}

std::pair<std::string, std::string> split_gen_id(const std::string& id) {
  auto pos = id.find(':');
  if (pos == std::string::npos) throw std::invalid_argument("bad generator id " + id);
  return {id.substr(0, pos), id.substr(pos + 1)};
}

namespace {

void collect_generators(const NodePtr& n, const std::string& path, std::vector<Generator>& out) {
  switch (n->type) {
    case ConstructionNode::Type::Leaf:
      for (std::size_t i = 0; i < n->block->gen_names.size(); ++i) {
        Generator g;
        g.node_path = path;
        g.id = make_gen_id(path, n->block->gen_names[i]);
        g.is_extension = false;
        g.block_gen_index = i;
        g.theta_raw = n->block->theta[i];
        out.push_back(std::move(g));
      }
      break;
    case ConstructionNode::Type::FreeProduct:
      collect_generators(n->left, path + "L", out);
      collect_generators(n->right, path + "R", out);
      break;
    case ConstructionNode::Type::Extension: {
      Generator g;
      g.node_path = path;
      g.id = make_gen_id(path, "z");
      g.is_extension = true;
      g.theta_raw = 1;
      out.push_back(std::move(g));
      collect_generators(n->left, path + "E", out);
      break;
    }
  }
}

} // namespace

std::vector<Generator> generators(const Construction& c) {
  std::vector<Generator> out;
  if (c.valid()) collect_generators(c.root(), "", out);
  return out;
}

PrincipalUnit theta_value(const Generator& g, std::uint64_t p, unsigned precision) {
  return PrincipalUnit(p, precision, g.theta_raw);
}

std::vector<RelationCheck> relations(const Construction& c, unsigned precision) {
  std::vector<RelationCheck> out;
  if (!c.valid()) return out;
  std::vector<Generator> gens = generators(c);

  // block relations, rewritten with path-qualified generator ids
  std::function<void(const NodePtr&, const std::string&)> rec =
      [&](const NodePtr& n, const std::string& path) {
        switch (n->type) {
          case ConstructionNode::Type::Leaf: {
            std::size_t i = 0;
            for (const auto& rel : n->block->relations) {
              Word w;
              for (const auto& l : rel.letters)
                w.letters.push_back({make_gen_id(path, l.gen), l.exp});
              out.push_back({word_merge(w),
                             "block " + n->block->id + " relation " + std::to_string(i++) +
                                 " at '" + path + "'"});
            }
            break;
          }
          case ConstructionNode::Type::FreeProduct:
            rec(n->left, path + "L");
            rec(n->right, path + "R");
            break;
          case ConstructionNode::Type::Extension: {
            std::string z = make_gen_id(path, "z");
            std::string inner_prefix = path + "E";
            for (const auto& g : gens) {
              if (g.node_path.compare(0, inner_prefix.size(), inner_prefix) != 0) continue;
              std::int64_t t = static_cast<std::int64_t>(
                  theta_value(g, c.p(), precision).residue());
              Word w;
              w.letters = {{g.id, 1}, {z, 1}, {g.id, -1}, {z, -t}};
              out.push_back({word_merge(w), "semidirect " + z + " by " + g.id});
            }
            rec(n->left, path + "E");
            break;
          }
        }
      };
  rec(c.root(), "");
  return out;
}

// ---------------------------------------------------------------------------
// Witnesses.

WitnessPtr make_witness(WitnessNode::Kind kind, WitnessPtr a, WitnessPtr b) {
  auto w = std::make_shared<WitnessNode>();
  w->kind = kind;
  w->a = std::move(a);
  w->b = std::move(b);
  return w;
}

namespace {

WitnessPtr full_witness_node(const NodePtr& n) {
  switch (n->type) {
    case ConstructionNode::Type::Leaf:
      return make_witness(WitnessNode::Kind::Keep);
    case ConstructionNode::Type::FreeProduct:
      return make_witness(WitnessNode::Kind::KeepBoth, full_witness_node(n->left),
                          full_witness_node(n->right));
    case ConstructionNode::Type::Extension:
      return make_witness(WitnessNode::Kind::KeepExt, full_witness_node(n->left));
  }
  return nullptr;
}

} // namespace

WitnessPtr full_witness(const Construction& c) { return full_witness_node(c.root()); }

bool is_full_witness(const WitnessPtr& w) {
  switch (w->kind) {
    case WitnessNode::Kind::Keep: return true;
    case WitnessNode::Kind::KeepBoth: return is_full_witness(w->a) && is_full_witness(w->b);
    case WitnessNode::Kind::KeepExt: return is_full_witness(w->a);
    default: return false;
  }
}

namespace {

Construction project_node(const WitnessPtr& w, const Construction& c, const NodePtr& n,
                          std::uint64_t p) {
  switch (w->kind) {
    case WitnessNode::Kind::Keep:
      if (n->type != ConstructionNode::Type::Leaf)
        throw std::invalid_argument("witness: Keep at non-leaf");
      {
        Construction out = Construction::leaf(n->block);
        return out;
      }
    case WitnessNode::Kind::KeepBoth: {
      if (n->type != ConstructionNode::Type::FreeProduct)
        throw std::invalid_argument("witness: KeepBoth at non-product");
      Construction a = project_node(w->a, c, n->left, p);
      Construction b = project_node(w->b, c, n->right, p);
      return Construction::free_product(a, b);
    }
    case WitnessNode::Kind::KeepLeft:
      if (n->type != ConstructionNode::Type::FreeProduct)
        throw std::invalid_argument("witness: KeepLeft at non-product");
      return project_node(w->a, c, n->left, p);
    case WitnessNode::Kind::KeepRight:
      if (n->type != ConstructionNode::Type::FreeProduct)
        throw std::invalid_argument("witness: KeepRight at non-product");
      return project_node(w->a, c, n->right, p);
    case WitnessNode::Kind::KeepExt:
      if (n->type != ConstructionNode::Type::Extension)
        throw std::invalid_argument("witness: KeepExt at non-extension");
      return Construction::extension(project_node(w->a, c, n->left, p));
    case WitnessNode::Kind::DropExt:
      if (n->type != ConstructionNode::Type::Extension)
        throw std::invalid_argument("witness: DropExt at non-extension");
      return project_node(w->a, c, n->left, p);
  }
  throw std::logic_error("witness: bad kind");
}

} // namespace

Construction project_witness(const WitnessPtr& w, const Construction& c) {
  return project_node(w, c, c.root(), c.p());
}

bool projects_trivial(const WitnessPtr& w, const NodePtr& node) {
  switch (w->kind) {
    case WitnessNode::Kind::Keep:
      return node->block->kind == BlockKind::Trivial;
    case WitnessNode::Kind::KeepBoth:
      return false;
    case WitnessNode::Kind::KeepLeft:
      return projects_trivial(w->a, node->left);
    case WitnessNode::Kind::KeepRight:
      return projects_trivial(w->a, node->right);
    case WitnessNode::Kind::KeepExt:
      return false;
    case WitnessNode::Kind::DropExt:
      return projects_trivial(w->a, node->left);
  }
  return false;
}

namespace {

// Visitor-based enumeration; fn returning false aborts.
bool enum_witnesses(const NodePtr& n, const std::function<bool(const WitnessPtr&)>& fn) {
  switch (n->type) {
    case ConstructionNode::Type::Leaf:
      return fn(make_witness(WitnessNode::Kind::Keep));
    case ConstructionNode::Type::FreeProduct: {
      bool go = enum_witnesses(n->left, [&](const WitnessPtr& a) {
        return fn(make_witness(WitnessNode::Kind::KeepLeft, a));
      });
      if (!go) return false;
      go = enum_witnesses(n->right, [&](const WitnessPtr& b) {
        return fn(make_witness(WitnessNode::Kind::KeepRight, b));
      });
      if (!go) return false;
      return enum_witnesses(n->left, [&](const WitnessPtr& a) {
        if (projects_trivial(a, n->left)) return true;
        return enum_witnesses(n->right, [&](const WitnessPtr& b) {
          if (projects_trivial(b, n->right)) return true;
          return fn(make_witness(WitnessNode::Kind::KeepBoth, a, b));
        });
      });
    }
    case ConstructionNode::Type::Extension:
      return enum_witnesses(n->left, [&](const WitnessPtr& a) {
        if (!fn(make_witness(WitnessNode::Kind::DropExt, a))) return false;
        return fn(make_witness(WitnessNode::Kind::KeepExt, a));
      });
  }
  return true;
}

} // namespace

void for_each_witness(const Construction& c, const std::function<bool(const WitnessPtr&)>& fn) {
  enum_witnesses(c.root(), fn);
}

std::vector<WitnessPtr> enumerate_witnesses(const Construction& c, std::size_t cap) {
  std::vector<WitnessPtr> out;
  for_each_witness(c, [&](const WitnessPtr& w) {
    if (out.size() >= cap) throw std::length_error("enumerate_witnesses: cap exceeded");
    out.push_back(w);
    return true;
  });
  return out;
}

std::pair<std::uint64_t, std::uint64_t> count_subconstructions(const Construction& c) {
  std::function<std::pair<std::uint64_t, std::uint64_t>(const NodePtr&)> rec =
      [&](const NodePtr& n) -> std::pair<std::uint64_t, std::uint64_t> {
    switch (n->type) {
      case ConstructionNode::Type::Leaf:
        return {1, n->block->kind == BlockKind::Trivial ? 1u : 0u};
      case ConstructionNode::Type::FreeProduct: {
        auto [lt, ltriv] = rec(n->left);
        auto [rt, rtriv] = rec(n->right);
        return {lt + rt + (lt - ltriv) * (rt - rtriv), ltriv + rtriv};
      }
      case ConstructionNode::Type::Extension: {
        auto [t, triv] = rec(n->left);
        return {2 * t, triv};
      }
    }
    return {0, 0};
  };
  return rec(c.root());
}

std::optional<std::string> to_sub_path(const WitnessPtr& w, const std::string& ambient_path) {
  if (w->kind == WitnessNode::Kind::Keep) {
    if (ambient_path.empty()) return std::string();
    throw std::out_of_range("to_sub_path: path extends past a leaf");
  }
  if (ambient_path.empty()) {
    switch (w->kind) {
      case WitnessNode::Kind::KeepBoth:
      case WitnessNode::Kind::KeepExt:
        return std::string();
      default:
        return std::nullopt;
    }
  }
  char head = ambient_path[0];
  std::string rest = ambient_path.substr(1);
  switch (w->kind) {
    case WitnessNode::Kind::KeepBoth: {
      if (head == 'L') {
        auto s = to_sub_path(w->a, rest);
        return s ? std::optional<std::string>("L" + *s) : std::nullopt;
      }
      if (head == 'R') {
        auto s = to_sub_path(w->b, rest);
        return s ? std::optional<std::string>("R" + *s) : std::nullopt;
      }
      break;
    }
    case WitnessNode::Kind::KeepLeft:
      if (head == 'L') return to_sub_path(w->a, rest);
      if (head == 'R') return std::nullopt;
      break;
    case WitnessNode::Kind::KeepRight:
      if (head == 'R') return to_sub_path(w->a, rest);
      if (head == 'L') return std::nullopt;
      break;
    case WitnessNode::Kind::KeepExt: {
      if (head == 'E') {
        auto s = to_sub_path(w->a, rest);
        return s ? std::optional<std::string>("E" + *s) : std::nullopt;
      }
      break;
    }
    case WitnessNode::Kind::DropExt:
      if (head == 'E') return to_sub_path(w->a, rest);
      break;
    default:
      break;
  }
  throw std::out_of_range("to_sub_path: path does not match construction shape");
}

std::string to_ambient_path(const WitnessPtr& w, const std::string& sub_path) {
  switch (w->kind) {
    case WitnessNode::Kind::Keep:
      if (sub_path.empty()) return "";
      throw std::out_of_range("to_ambient_path: path extends past a leaf");
    case WitnessNode::Kind::KeepBoth: {
      if (sub_path.empty()) return "";
      char head = sub_path[0];
      std::string rest = sub_path.substr(1);
      if (head == 'L') return "L" + to_ambient_path(w->a, rest);
      if (head == 'R') return "R" + to_ambient_path(w->b, rest);
      throw std::out_of_range("to_ambient_path: bad sub path");
    }
    case WitnessNode::Kind::KeepLeft:
      return "L" + to_ambient_path(w->a, sub_path);
    case WitnessNode::Kind::KeepRight:
      return "R" + to_ambient_path(w->a, sub_path);
    case WitnessNode::Kind::KeepExt: {
      if (sub_path.empty()) return "";
      if (sub_path[0] == 'E') return "E" + to_ambient_path(w->a, sub_path.substr(1));
      throw std::out_of_range("to_ambient_path: bad sub path");
    }
    case WitnessNode::Kind::DropExt:
      return "E" + to_ambient_path(w->a, sub_path);
  }
  throw std::logic_error("to_ambient_path: bad witness");
}

WitnessPtr compose_witness(const WitnessPtr& outer, const WitnessPtr& inner) {
  using K = WitnessNode::Kind;
  switch (outer->kind) {
    case K::Keep:
      if (inner->kind != K::Keep) throw std::invalid_argument("compose_witness: shape mismatch");
      return make_witness(K::Keep);
    case K::KeepBoth:
      switch (inner->kind) {
        case K::KeepBoth:
          return make_witness(K::KeepBoth, compose_witness(outer->a, inner->a),
                              compose_witness(outer->b, inner->b));
        case K::KeepLeft:
          return make_witness(K::KeepLeft, compose_witness(outer->a, inner->a));
        case K::KeepRight:
          return make_witness(K::KeepRight, compose_witness(outer->b, inner->a));
        default:
          throw std::invalid_argument("compose_witness: shape mismatch");
      }
    case K::KeepLeft:
      return make_witness(K::KeepLeft, compose_witness(outer->a, inner));
    case K::KeepRight:
      return make_witness(K::KeepRight, compose_witness(outer->a, inner));
    case K::KeepExt:
      switch (inner->kind) {
        case K::KeepExt:
          return make_witness(K::KeepExt, compose_witness(outer->a, inner->a));
        case K::DropExt:
          return make_witness(K::DropExt, compose_witness(outer->a, inner->a));
        default:
          throw std::invalid_argument("compose_witness: shape mismatch");
      }
    case K::DropExt:
      return make_witness(K::DropExt, compose_witness(outer->a, inner));
  }
  throw std::logic_error("compose_witness: bad witness");
}

std::string witness_to_string(const WitnessPtr& w) {
  using K = WitnessNode::Kind;
  switch (w->kind) {
    case K::Keep: return "K";
    case K::KeepBoth: return "B(" + witness_to_string(w->a) + "," + witness_to_string(w->b) + ")";
    case K::KeepLeft: return "L(" + witness_to_string(w->a) + ")";
    case K::KeepRight: return "R(" + witness_to_string(w->a) + ")";
    case K::KeepExt: return "E(" + witness_to_string(w->a) + ")";
    case K::DropExt: return "D(" + witness_to_string(w->a) + ")";
  }
  return "?";
}

namespace {

WitnessPtr parse_witness(const std::string& s, std::size_t& pos) {
  using K = WitnessNode::Kind;
  if (pos >= s.size()) throw std::invalid_argument("witness: truncated");
  char c = s[pos++];
  if (c == 'K') return make_witness(K::Keep);
  auto expect = [&](char e) {
    if (pos >= s.size() || s[pos] != e) throw std::invalid_argument("witness: malformed");
    ++pos;
  };
  if (c == 'B') {
    expect('(');
    auto a = parse_witness(s, pos);
    expect(',');
    auto b = parse_witness(s, pos);
    expect(')');
    return make_witness(K::KeepBoth, a, b);
  }
  K k;
  switch (c) {
    case 'L': k = K::KeepLeft; break;
    case 'R': k = K::KeepRight; break;
    case 'E': k = K::KeepExt; break;
    case 'D': k = K::DropExt; break;
    default: throw std::invalid_argument("witness: bad tag");
  }
  expect('(');
  auto a = parse_witness(s, pos);
  expect(')');
  return make_witness(k, a);
}

} // namespace

WitnessPtr witness_from_string(const std::string& s) {
  std::size_t pos = 0;
  auto w = parse_witness(s, pos);
  if (pos != s.size()) throw std::invalid_argument("witness: trailing input");
  return w;
}

// ---------------------------------------------------------------------------
// Generator -> word maps.

const Word& GenWordMap::image(const std::string& gen_id) const {
  auto it = table_.find(gen_id);
  if (it == table_.end())
    throw std::invalid_argument("GenWordMap: no image for generator " + gen_id);
  return it->second;
}

bool GenWordMap::theta_compatible(unsigned precision) const {
  std::map<std::string, std::int64_t> cod_theta;
  for (const auto& g : generators(codomain_)) cod_theta[g.id] = g.theta_raw;
  std::uint64_t p = domain_.p();
  for (const auto& g : generators(domain_)) {
    Zmod acc(p, precision, 1);
    for (const auto& l : image(g.id).letters) {
      auto it = cod_theta.find(l.gen);
      if (it == cod_theta.end()) return false;
      acc = acc * Zmod(p, precision, it->second).pow(l.exp);
    }
    if (acc != Zmod(p, precision, g.theta_raw)) return false;
  }
  return true;
}

GenWordMap identity_map(const Construction& c) {
  std::map<std::string, Word> table;
  for (const auto& g : generators(c)) table[g.id] = Word::letter(g.id);
  return GenWordMap(c, c, std::move(table));
}

GenWordMap iota(const WitnessPtr& w, const Construction& c) {
  Construction d = project_witness(w, c);
  std::map<std::string, Word> table;
  for (const auto& g : generators(d)) {
    auto [path, name] = split_gen_id(g.id);
    table[g.id] = Word::letter(make_gen_id(to_ambient_path(w, path), name));
  }
  return GenWordMap(d, c, std::move(table));
}

GenWordMap pi(const WitnessPtr& w, const Construction& c) {
  Construction d = project_witness(w, c);
  std::map<std::string, Word> table;
  for (const auto& g : generators(c)) {
    auto [path, name] = split_gen_id(g.id);
    auto sub = to_sub_path(w, path);
    table[g.id] = sub ? Word::letter(make_gen_id(*sub, name)) : Word::one();
  }
  return GenWordMap(c, d, std::move(table));
}

GenWordMap compose_maps(const GenWordMap& outer, const GenWordMap& inner) {
  if (!inner.codomain().structurally_equal(outer.domain()))
    throw std::invalid_argument("compose_maps: domain/codomain mismatch");
  std::map<std::string, Word> table;
  for (const auto& [g, w] : inner.table()) table[g] = word_substitute(w, outer.table());
  return GenWordMap(inner.domain(), outer.codomain(), std::move(table));
}

// ---------------------------------------------------------------------------
// Principal tuples.

namespace {

void collect_leaves(const NodePtr& n, const std::string& path, std::vector<std::string>& out) {
  switch (n->type) {
    case ConstructionNode::Type::Leaf:
      out.push_back(path);
      break;
    case ConstructionNode::Type::FreeProduct:
      collect_leaves(n->left, path + "L", out);
      collect_leaves(n->right, path + "R", out);
      break;
    case ConstructionNode::Type::Extension:
      collect_leaves(n->left, path + "E", out);
      break;
  }
}

} // namespace

PrincipalTuple principal_tuple_at(const Construction& c, const std::string& leaf_path) {
  if (c.node_at(leaf_path)->type != ConstructionNode::Type::Leaf)
    throw std::invalid_argument("principal_tuple_at: not a leaf path");
  PrincipalTuple t;
  t.root = leaf_path;
  // proper prefixes ending in an Extension node, innermost first:
  // the prefix of length k addresses an Extension node iff leaf_path[k] == 'E'
  for (std::size_t k = leaf_path.size(); k-- > 0;)
    if (leaf_path[k] == 'E') t.z_nodes.push_back(leaf_path.substr(0, k));
  return t;
}

std::vector<PrincipalTuple> principal_tuples(const Construction& c) {
  std::vector<std::string> leaves;
  collect_leaves(c.root(), "", leaves);
  std::vector<PrincipalTuple> out;
  out.reserve(leaves.size());
  for (const auto& l : leaves) out.push_back(principal_tuple_at(c, l));
  return out;
}

std::vector<PrincipalTuple> principal_tuples_inductive(const Construction& c) {
  std::function<std::vector<PrincipalTuple>(const NodePtr&)> rec =
      [&](const NodePtr& n) -> std::vector<PrincipalTuple> {
    switch (n->type) {
      case ConstructionNode::Type::Leaf:
        return {PrincipalTuple{"", {}}};
      case ConstructionNode::Type::FreeProduct: {
        std::vector<PrincipalTuple> out;
        for (auto side : {std::make_pair(n->left, 'L'), std::make_pair(n->right, 'R')})
          for (auto t : rec(side.first)) {
            t.root = side.second + t.root;
            for (auto& z : t.z_nodes) z = side.second + z;
            out.push_back(std::move(t));
          }
        return out;
      }
      case ConstructionNode::Type::Extension: {
        std::vector<PrincipalTuple> out;
        for (auto t : rec(n->left)) {
          t.root = "E" + t.root;
          for (auto& z : t.z_nodes) z = "E" + z;
          t.z_nodes.push_back(""); // the new outermost Z
          out.push_back(std::move(t));
        }
        return out;
      }
    }
    return {};
  };
  return rec(c.root());
}

std::size_t extension_rank(const Construction& c) {
  std::vector<std::string> leaves;
  collect_leaves(c.root(), "", leaves);
  std::size_t best = 0;
  for (const auto& l : leaves)
    best = std::max(best, static_cast<std::size_t>(std::count(l.begin(), l.end(), 'E')));
  return best;
}

std::size_t extension_rank_recursive(const Construction& c) {
  std::function<std::size_t(const NodePtr&)> rec = [&](const NodePtr& n) -> std::size_t {
    switch (n->type) {
      case ConstructionNode::Type::Leaf:
        return 0;
      case ConstructionNode::Type::FreeProduct:
        return std::max(rec(n->left), rec(n->right));
      case ConstructionNode::Type::Extension:
        return rec(n->left) + 1;
    }
    return 0;
  };
  return rec(c.root());
}

bool compatible(const PrincipalTuple& t, const WitnessPtr& w) {
  return to_sub_path(w, t.root).has_value();
}

bool compatible_inductive(const PrincipalTuple& t, const WitnessPtr& w, const Construction& c) {
  using K = WitnessNode::Kind;
  std::function<bool(const WitnessPtr&, const NodePtr&, const std::string&)> rec =
      [&](const WitnessPtr& wn, const NodePtr& n, const std::string& path) -> bool {
    switch (wn->kind) {
      case K::Keep:
        return t.root == path;
      case K::KeepBoth:
        // the root sits in exactly one factor, so at most one branch holds
        return rec(wn->a, n->left, path + "L") || rec(wn->b, n->right, path + "R");
      case K::KeepLeft:
        return rec(wn->a, n->left, path + "L");
      case K::KeepRight:
        return rec(wn->a, n->right, path + "R");
      case K::KeepExt:
      case K::DropExt:
        return rec(wn->a, n->left, path + "E");
    }
    return false;
  };
  return rec(w, c.root(), "");
}

PrincipalTuple restrict_tuple(const PrincipalTuple& t, const WitnessPtr& w) {
  auto root = to_sub_path(w, t.root);
  if (!root) throw std::invalid_argument("restrict_tuple: tuple not compatible with witness");
  PrincipalTuple out;
  out.root = *root;
  for (const auto& z : t.z_nodes)
    if (auto s = to_sub_path(w, z)) out.z_nodes.push_back(*s);
  return out;
}

} // namespace etsym
