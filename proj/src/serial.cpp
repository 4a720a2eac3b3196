#include "etsym/serial.hpp"

#include <algorithm>

namespace etsym {

namespace {

BlockKind kind_from_string(const std::string& s) {
  if (s == "trivial") return BlockKind::Trivial;
  if (s == "free_procyclic") return BlockKind::FreeProCyclic;
  if (s == "sign") return BlockKind::SignOfOrderTwo;
  if (s == "demushkin") return BlockKind::Demushkin;
  if (s == "custom") return BlockKind::Custom;
  throw std::invalid_argument("unknown block kind '" + s + "'");
}

} // namespace

Json word_to_json(const Word& w) {
  Json out = Json::array();
  for (const auto& l : w.letters) out.push_back(Json::array({l.gen, l.exp}));
  return out;
}

Word word_from_json(const Json& j) {
  Word w;
  for (const auto& l : j)
    w.letters.push_back({l.at(0).get<std::string>(), l.at(1).get<std::int64_t>()});
  return word_merge(w);
}

Json registry_to_json(const BlockRegistry& reg) {
  Json out = Json::array();
  for (const auto& [id, b] : reg.all()) {
    Json jb;
    jb["id"] = id;
    jb["kind"] = block_kind_name(b->kind);
    jb["p"] = b->p;
    if (!b->theta.empty()) jb["theta"] = b->theta;
    if (!b->gen_names.empty() || !b->relations.empty()) {
      Json pres;
      pres["generators"] = b->gen_names;
      Json rels = Json::array();
      for (const auto& r : b->relations) rels.push_back(word_to_json(r));
      pres["relations"] = rels;
      jb["presentation"] = pres;
    }
    if (!b->bounds.empty()) {
      Json rows = Json::array();
      for (const auto& row : b->bounds)
        rows.push_back(Json::array({row.degree, row.infinite ? Json("inf") : Json(row.value)}));
      jb["bounds"] = rows;
    }
    if (b->ring) {
      Json jr;
      jr["d1"] = b->ring->d1;
      jr["d2"] = b->ring->d2;
      Json cups = Json::array();
      for (std::size_t i = 0; i < b->ring->d1; ++i)
        for (std::size_t j2 = 0; j2 < b->ring->d1; ++j2) {
          const auto& v = b->ring->cup[i][j2];
          if (std::any_of(v.begin(), v.end(), [](std::uint8_t x) { return x != 0; }))
            cups.push_back(Json::array({i, j2, v}));
        }
      jr["cup"] = cups;
      jb["ring"] = jr;
    }
    out.push_back(jb);
  }
  return out;
}

BlockRegistry registry_from_json(const Json& j) {
  BlockRegistry reg;
  for (const auto& jb : j) {
    BlockSpec b;
    b.id = jb.at("id").get<std::string>();
    b.kind = kind_from_string(jb.at("kind").get<std::string>());
    b.p = jb.at("p").get<std::uint64_t>();
    if (jb.contains("theta")) b.theta = jb.at("theta").get<std::vector<std::int64_t>>();
    if (jb.contains("presentation")) {
      const auto& pres = jb.at("presentation");
      b.gen_names = pres.at("generators").get<std::vector<std::string>>();
      if (pres.contains("relations"))
        for (const auto& r : pres.at("relations")) b.relations.push_back(word_from_json(r));
    } else if (b.kind == BlockKind::FreeProCyclic) {
      b.gen_names = {"x"};
    } else if (b.kind == BlockKind::SignOfOrderTwo) {
      b.gen_names = {"e"};
      b.relations = {Word::letter("e", 2)};
      if (b.theta.empty()) b.theta = {-1};
    }
    if (jb.contains("bounds")) {
      for (const auto& row : jb.at("bounds")) {
        DeclaredBound db;
        db.degree = row.at(0).get<unsigned>();
        if (row.at(1).is_string()) {
          db.infinite = true;
        } else {
          db.value = row.at(1).get<std::uint64_t>();
        }
        b.bounds.push_back(db);
      }
    }
    if (jb.contains("ring")) {
      const auto& jr = jb.at("ring");
      CustomRing ring;
      ring.d1 = jr.at("d1").get<std::size_t>();
      ring.d2 = jr.at("d2").get<std::size_t>();
      ring.cup.assign(ring.d1, std::vector<FVec>(ring.d1, FVec(ring.d2, 0)));
      for (const auto& entry : jr.at("cup")) {
        std::size_t i = entry.at(0).get<std::size_t>();
        std::size_t k = entry.at(1).get<std::size_t>();
        ring.cup.at(i).at(k) = entry.at(2).get<FVec>();
      }
      b.ring = ring;
    }
    reg.add(std::move(b));
  }
  return reg;
}

// ---------------------------------------------------------------------------

GroupSpec group_spec_from_json(const Json& j) {
  GroupSpec s;
  s.kind = j.at("kind").get<std::string>();
  s.p = j.at("p").get<std::uint64_t>();
  if (s.kind == "um" || s.kind == "ubar") {
    s.m = j.at("m").get<std::size_t>();
  } else if (s.kind == "custom") {
    for (const auto& g : j.at("generators"))
      s.generators.push_back(g.get<std::vector<std::vector<std::uint64_t>>>());
  } else {
    throw std::invalid_argument("group spec: unknown kind '" + s.kind + "'");
  }
  return s;
}

GroupSpec group_spec_from_inline(const std::string& text) {
  auto colon = text.find(':');
  auto comma = text.find(',', colon);
  if (colon == std::string::npos || comma == std::string::npos)
    throw std::invalid_argument("group spec: expected '<kind>:<m>,<p>'");
  GroupSpec s;
  s.kind = text.substr(0, colon);
  if (s.kind != "um" && s.kind != "ubar")
    throw std::invalid_argument("group spec: inline form supports um/ubar only");
  s.m = std::stoul(text.substr(colon + 1, comma - colon - 1));
  s.p = std::stoull(text.substr(comma + 1));
  return s;
}

Json group_spec_to_json(const GroupSpec& s) {
  Json j;
  j["kind"] = s.kind;
  j["p"] = s.p;
  if (s.kind == "custom") {
    j["generators"] = s.generators;
  } else {
    j["m"] = s.m;
  }
  return j;
}

std::shared_ptr<const FiniteGroup> build_group(const GroupSpec& s, std::size_t cap) {
  if (s.kind == "um")
    return std::make_shared<const FiniteGroup>(unitriangular(s.m, s.p, cap));
  if (s.kind == "ubar")
    return std::make_shared<const FiniteGroup>(bar_unitriangular(s.m, s.p, cap));
  std::vector<FpMatrix> gens;
  for (const auto& rows : s.generators) {
    std::size_t n = rows.size();
    FpMatrix m(n, s.p);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw std::invalid_argument("custom group: non-square matrix");
      for (std::size_t k = 0; k < n; ++k) m.set(i, k, rows[i][k]);
    }
    if (!m.is_unipotent_upper())
      throw std::invalid_argument("custom group: generator is not unipotent upper-triangular");
    gens.push_back(std::move(m));
  }
  if (gens.empty()) throw std::invalid_argument("custom group: no generators");
  return std::make_shared<const FiniteGroup>(FiniteGroup::closure(std::move(gens), cap));
}

Json matrix_to_json(const FpMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

namespace {

FpMatrix matrix_from_json(const Json& j, std::uint64_t p, bool bar) {
  std::size_t n = j.size();
  FpMatrix m(n, p, bar);
  for (std::size_t i = 0; i < n; ++i) {
    if (j.at(i).size() != n) throw std::invalid_argument("matrix: not square");
    for (std::size_t k = 0; k < n; ++k) m.set(i, k, j.at(i).at(k).get<std::uint64_t>());
  }
  if (bar) m = m.to_bar();
  return m;
}

std::map<std::string, FiniteGroup::Elt> images_from_json(const Json& j, const FiniteGroup& g,
                                                         bool bar) {
  std::map<std::string, FiniteGroup::Elt> out;
  for (auto it = j.begin(); it != j.end(); ++it)
    out[it.key()] = g.index_of(matrix_from_json(it.value(), g.p(), bar));
  return out;
}

Json images_to_json(const Hom& rho) {
  Json out = Json::object();
  for (const auto& [id, e] : rho.images) out[id] = matrix_to_json(rho.target->matrix(e));
  return out;
}

} // namespace

HomFile hom_from_json(const Json& j, std::size_t cap) {
  HomFile f;
  f.blocks = registry_from_json(j.at("blocks"));
  f.construction_text = j.at("construction").get<std::string>();
  f.target = group_spec_from_json(j.at("target"));
  Construction c = parse_construction(f.construction_text, f.blocks);
  auto group = build_group(f.target, cap);
  bool bar = f.target.kind == "ubar";
  f.hom = make_hom(c, group, images_from_json(j.at("images"), *group, bar));
  return f;
}

Json hom_to_json(const Hom& rho, const BlockRegistry& blocks, const GroupSpec& target) {
  Json j;
  j["blocks"] = registry_to_json(blocks);
  j["construction"] = rho.domain.print();
  j["target"] = group_spec_to_json(target);
  j["images"] = images_to_json(rho);
  return j;
}

// ---------------------------------------------------------------------------

namespace {

Json gamma_to_json(const GenWordMap& g) {
  Json out = Json::object();
  for (const auto& [id, w] : g.table()) out[id] = word_to_json(w);
  return out;
}

Json alpha_to_json(const AAutMatrix& a) {
  Json j;
  j["rank"] = a.rank();
  j["precision"] = a.precision();
  Json rows = Json::array();
  for (std::size_t i = 0; i < a.rank(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < a.rank(); ++k) row.push_back(a.entry(i, k));
    rows.push_back(row);
  }
  j["entries"] = rows;
  return j;
}

AAutMatrix alpha_from_json(const Json& j, std::uint64_t p) {
  std::size_t rank = j.at("rank").get<std::size_t>();
  unsigned precision = j.at("precision").get<unsigned>();
  ZmodMatrix m(rank, p, precision);
  const auto& rows = j.at("entries");
  if (rows.size() != rank) throw std::invalid_argument("alpha: bad row count");
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t k = 0; k < rank; ++k)
      m.set(i, k, rows.at(i).at(k).get<std::int64_t>());
  return AAutMatrix(m);
}

} // namespace

Json certificate_to_json(const FactorizationCertificate& cert, const BlockRegistry& blocks,
                         const GroupSpec& target) {
  Json j;
  j["format"] = "etsym-certificate/1";
  j["blocks"] = registry_to_json(blocks);
  j["construction"] = cert.initial.domain.print();
  j["target"] = group_spec_to_json(target);
  j["l"] = cert.l_bound;
  j["images"] = images_to_json(cert.initial);
  Json stages = Json::array();
  for (const auto& st : cert.stages) {
    Json js;
    js["root"] = st.tuple.root;
    js["k"] = st.collapse_k;
    js["alpha"] = alpha_to_json(st.alpha);
    js["gamma"] = gamma_to_json(st.gamma);
    js["witness"] = witness_to_string(st.witness);
    js["construction"] = st.sub.print();
    js["images"] = images_to_json(st.rho2);
    stages.push_back(js);
  }
  j["stages"] = stages;
  Json fin;
  fin["construction"] = cert.final.domain.print();
  fin["images"] = images_to_json(cert.final);
  j["final"] = fin;
  return j;
}

FactorizationCertificate certificate_from_json(const Json& j, std::size_t cap) {
  BlockRegistry blocks = registry_from_json(j.at("blocks"));
  GroupSpec target = group_spec_from_json(j.at("target"));
  auto group = build_group(target, cap);
  bool bar = target.kind == "ubar";

  Construction c0 = parse_construction(j.at("construction").get<std::string>(), blocks);
  FactorizationCertificate cert;
  cert.initial = make_hom(c0, group, images_from_json(j.at("images"), *group, bar));
  cert.l_bound = j.at("l").get<unsigned>();

  Construction cur = c0;
  for (const auto& js : j.at("stages")) {
    FactorStage st(alpha_from_json(js.at("alpha"), c0.p()));
    st.tuple = principal_tuple_at(cur, js.at("root").get<std::string>());
    st.collapse_k = js.at("k").get<std::size_t>();
    std::map<std::string, Word> table;
    const auto& jg = js.at("gamma");
    for (auto it = jg.begin(); it != jg.end(); ++it) table[it.key()] = word_from_json(it.value());
    st.gamma = GenWordMap(cur, cur, std::move(table));
    st.witness = witness_from_string(js.at("witness").get<std::string>());
    st.sub = parse_construction(js.at("construction").get<std::string>(), blocks);
    st.rho2 = make_hom(st.sub, group, images_from_json(js.at("images"), *group, bar));
    cert.stages.push_back(std::move(st));
    cur = cert.stages.back().sub;
  }
  const auto& fin = j.at("final");
  Construction cf = parse_construction(fin.at("construction").get<std::string>(), blocks);
  cert.final = make_hom(cf, group, images_from_json(fin.at("images"), *group, bar));
  return cert;
}

std::optional<std::string> verify_certificate_json(const Json& j, std::size_t cap) {
  try {
    FactorizationCertificate cert = certificate_from_json(j, cap);
    return check_certificate(cert);
  } catch (const std::exception& e) {
    return std::string("certificate rejected: ") + e.what();
  }
}

// ---------------------------------------------------------------------------

Json subgroup_to_json(const Subgroup& s) {
  Json j;
  j["order"] = s.order();
  Json gens = Json::array();
  for (auto e : s.gens) gens.push_back(matrix_to_json(s.parent->matrix(e)));
  j["generators"] = gens;
  return j;
}

Json ring_to_json(const CohRing& r) {
  Json j;
  j["p"] = r.p;
  j["d1"] = r.d1;
  j["d2"] = r.d2;
  j["h1_basis"] = r.h1_labels;
  j["h2_basis"] = r.h2_labels;
  Json cups = Json::array();
  for (std::size_t i = 0; i < r.d1; ++i)
    for (std::size_t k = 0; k < r.d1; ++k) {
      const auto& v = r.cup[i][k];
      if (std::any_of(v.begin(), v.end(), [](std::uint8_t x) { return x != 0; }))
        cups.push_back(Json::array({i, k, v}));
    }
  j["cup"] = cups;
  return j;
}

} // namespace etsym
