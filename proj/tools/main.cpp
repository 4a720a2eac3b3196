#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "etsym/bounds.hpp"
#include "etsym/cohomology.hpp"
#include "etsym/construction.hpp"
#include "etsym/fpgroup.hpp"
#include "etsym/homomorph.hpp"
#include "etsym/serial.hpp"

namespace {

using namespace etsym;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInvalidHom = 3;
constexpr int kExitVerifyFail = 4;
constexpr int kExitHypothesis = 5;

struct CliError {
  int code;
  std::string message;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{1, "cannot open file: " + path};
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CliError{kExitParse, "JSON parse error in " + path + ": " + e.what()};
  }
  return j;
}

void emit(const Json& report, const std::string& format) {
  if (format == "json") {
    std::cout << report.dump(2) << "\n";
    return;
  }
  // flat two-column table of the top-level fields
  for (auto it = report.begin(); it != report.end(); ++it)
    std::cout << it.key() << "\t"
              << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump())
              << "\n";
}

BlockRegistry load_blocks(const std::string& path) {
  try {
    return registry_from_json(read_json_file(path));
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError{kExitParse, std::string("block registry: ") + e.what()};
  }
}

GroupSpec parse_group_arg(const std::string& arg) {
  if (arg.rfind("um:", 0) == 0 || arg.rfind("ubar:", 0) == 0)
    return group_spec_from_inline(arg);
  return group_spec_from_json(read_json_file(arg));
}

// ---------------------------------------------------------------------------

int cmd_analyze(const std::string& text, const std::string& blocks_path,
                const std::string& format) {
  BlockRegistry reg = load_blocks(blocks_path);
  Construction c;
  try {
    c = parse_construction(text, reg);
  } catch (const ParseError& e) {
    throw CliError{kExitParse, std::string("parse error: ") + e.what()};
  }
  Json report;
  report["construction"] = c.print();
  report["p"] = c.p();
  report["extension_rank"] = extension_rank(c);
  Json tuples = Json::array();
  for (const auto& t : principal_tuples(c)) {
    Json jt;
    jt["root"] = t.root;
    jt["rank"] = t.rank();
    jt["z_nodes"] = t.z_nodes;
    tuples.push_back(jt);
  }
  report["principal_tuples"] = tuples;
  report["generators"] = generators(c).size();
  report["relations"] = relations(c, 1).size();
  auto [total, trivial] = count_subconstructions(c);
  report["subconstructions"] = total;
  report["trivial_subconstructions"] = trivial;
  emit(report, format);
  return kExitOk;
}

int cmd_lvalue(const std::string& group_arg, std::size_t cap, unsigned threads,
               const std::string& format) {
  GroupSpec spec = parse_group_arg(group_arg);
  Json report;
  report["group"] = group_spec_to_json(spec);
  auto analytic = [&]() -> Json {
    Json a;
    if (spec.kind == "um")
      a["goozeff_barry"] = ((spec.m + 1) * (spec.m + 1)) / 4;
    else if (spec.kind == "ubar")
      a["lemma_bound"] = (spec.m * spec.m) / 4 + spec.m - 1;
    return a;
  };
  std::shared_ptr<const FiniteGroup> g;
  try {
    g = build_group(spec, cap);
  } catch (const std::length_error&) {
    Json a = analytic();
    report["bound_only"] = true;
    for (auto it = a.begin(); it != a.end(); ++it) report[it.key()] = it.value();
    emit(report, format);
    return kExitOk;
  }
  auto result = max_abelian_order(*g, threads);
  unsigned l = 0;
  for (std::uint64_t o = result.order; o > 1; o /= g->p()) ++l;
  report["order"] = g->order();
  report["max_abelian_order"] = result.order;
  report["l"] = l;
  Json a = analytic();
  for (auto it = a.begin(); it != a.end(); ++it) {
    report[it.key()] = it.value();
    report[it.key() + "_matches"] = (it.value().get<std::uint64_t>() == l);
  }
  report["witness"] = subgroup_to_json(result.witness);
  emit(report, format);
  return kExitOk;
}

int cmd_factor(const std::string& hom_path, const std::string& out_path, std::size_t cap,
               unsigned threads) {
  Json j = read_json_file(hom_path);
  HomFile file;
  try {
    file = hom_from_json(j, cap);
  } catch (const ParseError& e) {
    throw CliError{kExitParse, std::string("construction parse error: ") + e.what()};
  } catch (const std::exception& e) {
    throw CliError{kExitInvalidHom, std::string("invalid homomorphism file: ") + e.what()};
  }
  auto violations = validate(file.hom);
  if (!violations.empty()) {
    Json report;
    report["valid"] = false;
    Json v = Json::array();
    for (const auto& viol : violations) v.push_back(viol.description);
    report["violations"] = v;
    std::cout << report.dump(2) << "\n";
    return kExitInvalidHom;
  }
  FactorizationCertificate cert = factor_full(file.hom, std::nullopt, threads);
  Json out = certificate_to_json(cert, file.blocks, file.target);
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream os(out_path);
    if (!os) throw CliError{1, "cannot write " + out_path};
    os << out.dump(2) << "\n";
    Json note;
    note["certificate"] = out_path;
    note["stages"] = cert.stages.size();
    note["final_construction"] = cert.final.domain.print();
    note["final_extension_rank"] = extension_rank(cert.final.domain);
    note["l"] = cert.l_bound;
    std::cout << note.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_verify(const std::string& cert_path, std::size_t cap) {
  Json j = read_json_file(cert_path);
  auto err = verify_certificate_json(j, cap);
  Json report;
  report["certificate"] = cert_path;
  report["pass"] = !err.has_value();
  if (err) report["error"] = *err;
  std::cout << report.dump(2) << "\n";
  return err ? kExitVerifyFail : kExitOk;
}

int cmd_bounds(const std::string& construction_text, const std::string& group_arg,
               const std::string& blocks_path, unsigned degree, std::uint64_t p, bool sign,
               std::size_t cap, unsigned threads, const std::string& format) {
  Json report;
  try {
    if (!construction_text.empty()) {
      if (blocks_path.empty()) throw CliError{1, "bounds --construction requires --blocks"};
      BlockRegistry reg = load_blocks(blocks_path);
      Construction c;
      try {
        c = parse_construction(construction_text, reg);
      } catch (const ParseError& e) {
        throw CliError{kExitParse, std::string("parse error: ") + e.what()};
      }
      BoundTable ct = BoundTable::of_construction(c);
      for (unsigned deg = 2; deg <= degree; ++deg)
        if (!ct.value(deg).is_finite()) throw InfiniteTableError(deg);
      report["construction"] = c.print();
      report["e"] = extension_rank(c);
      report["m"] = degree;
      report["mode"] = "construction";
      ExtInt v = construction_bound(c, degree, ct);
      report["f_value"] = v.is_finite() ? Json(v.v) : Json("inf");
    } else if (!group_arg.empty()) {
      BoundTable table;
      if (!blocks_path.empty()) {
        BlockRegistry reg = load_blocks(blocks_path);
        std::vector<BoundTable> ts;
        for (const auto& [id, b] : reg.all()) ts.push_back(BoundTable::of_block(*b));
        table = BoundTable::sup(ts);
        report["table"] = "blocks:" + blocks_path;
      } else {
        table = BoundTable::standard(p, sign);
        report["table"] = sign ? "standard+sign" : "standard";
      }
      GroupSpec spec = parse_group_arg(group_arg);
      auto g = build_group(spec, cap);
      unsigned l = l_value(*g, threads);
      report["group"] = group_spec_to_json(spec);
      report["l"] = l;
      report["n"] = degree;
      report["mode"] = "uniform";
      ExtInt v = uniform_bound(*g, degree, table, l, threads);
      report["f_value"] = v.is_finite() ? Json(v.v) : Json("inf");
    } else {
      throw CliError{1, "bounds needs --construction or --group"};
    }
  } catch (const InfiniteTableError& e) {
    throw CliError{kExitHypothesis, e.what()};
  }
  emit(report, format);
  return kExitOk;
}

int cmd_massey(unsigned m, std::uint64_t p, bool exact, std::size_t cap, unsigned threads,
               const std::string& format) {
  Json report;
  report["m"] = m;
  report["p"] = p;
  report["lemma_bound"] = massey_symbol_bound(m, p, MasseyMode::LemmaBound);
  if (exact) {
    try {
      std::uint64_t e = massey_symbol_bound(m, p, MasseyMode::ExactL, cap, threads);
      report["exact_l_bound"] = e;
      report["mode"] = "exact_l";
    } catch (const std::length_error&) {
      report["mode"] = "lemma_bound (cap exceeded)";
    }
  } else {
    report["mode"] = "lemma_bound";
  }
  emit(report, format);
  return kExitOk;
}

int cmd_oracle(const std::string& construction_text, const std::string& blocks_path,
               const std::string& omega_arg, bool dump_ring, std::size_t cap,
               const std::string& format) {
  BlockRegistry reg = load_blocks(blocks_path);
  Construction c;
  try {
    c = parse_construction(construction_text, reg);
  } catch (const ParseError& e) {
    throw CliError{kExitParse, std::string("parse error: ") + e.what()};
  }
  CohRing ring;
  try {
    ring = ring_of(c);
  } catch (const std::exception& e) {
    throw CliError{kExitHypothesis, std::string("oracle: ") + e.what()};
  }
  SymlCaps caps;
  caps.state_cap = cap;
  caps.symbol_cap = cap;
  Json report;
  report["construction"] = c.print();
  report["d1"] = ring.d1;
  report["d2"] = ring.d2;
  if (dump_ring) report["ring"] = ring_to_json(ring);

  BoundTable table = BoundTable::of_construction(c);
  ExtInt bound = construction_bound(c, 2, table);
  report["e"] = extension_rank(c);
  report["f_bound"] = bound.is_finite() ? Json(bound.v) : Json("inf");

  if (!omega_arg.empty()) {
    FVec omega;
    std::size_t pos = 0;
    while (pos < omega_arg.size()) {
      auto comma = omega_arg.find(',', pos);
      if (comma == std::string::npos) comma = omega_arg.size();
      omega.push_back(static_cast<std::uint8_t>(std::stoul(omega_arg.substr(pos, comma - pos))));
      pos = comma + 1;
    }
    auto s = syml_exact(ring, omega, caps);
    report["omega"] = omega;
    report["syml"] = s ? Json(*s) : Json("unreachable");
  } else {
    SymlScan scan = syml_scan(ring, caps);
    report["all_reachable"] = scan.all_reachable;
    report["max_syml"] = scan.max_syml;
    report["argmax"] = scan.argmax;
    bool pass = scan.all_reachable && bound.is_finite() && scan.max_syml <= bound.v;
    report["bound_respected"] = pass;
  }
  emit(report, format);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elementary-type pro-p pairs: symbol length bounds, factoring, and oracles"};
  app.require_subcommand(1);

  std::string construction_text, blocks_path, group_arg, hom_path, cert_path, out_path;
  std::string omega_arg, format = "json";
  std::uint64_t p = 3;
  unsigned m = 2, n = 2, threads = 1;
  std::size_t cap = 1u << 16;
  bool exact_l = false, sign = false, dump_ring = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--cap", cap, "element / state cap");
    sub->add_option("--threads", threads, "worker threads for searches");
    sub->add_option("--format", format, "json|table")->check(CLI::IsMember({"json", "table"}));
  };

  auto* analyze =
      app.add_subcommand("analyze", "parse a construction and report its combinatorics");
  analyze->add_option("construction", construction_text, "construction text")->required();
  analyze->add_option("--blocks", blocks_path, "block registry JSON")->required();
  add_common(analyze);

  auto* lvalue = app.add_subcommand("lvalue", "maximal abelian subgroup order and l value");
  lvalue->add_option("--group", group_arg, "um:M,P | ubar:M,P | spec file")->required();
  add_common(lvalue);

  auto* factor =
      app.add_subcommand("factor", "factor a homomorphism through a low-rank subconstruction");
  factor->add_option("--hom", hom_path, "homomorphism JSON file")->required();
  factor->add_option("-o,--out", out_path, "certificate output path");
  add_common(factor);

  auto* verify = app.add_subcommand("verify", "re-verify a factorization certificate");
  verify->add_option("--cert", cert_path, "certificate JSON file")->required();
  add_common(verify);

  auto* bounds = app.add_subcommand("bounds", "f(e, m) bound calculus");
  bounds->add_option("--construction", construction_text, "construction text");
  bounds->add_option("--group", group_arg, "target group for the uniform bound");
  bounds->add_option("--blocks", blocks_path, "block registry JSON");
  bounds->add_option("--n,--m", n, "cohomological degree");
  bounds->add_option("--p", p, "prime (standard table)");
  bounds->add_flag("--sign", sign, "include the order-2 sign block (p = 2)");
  add_common(bounds);

  auto* massey = app.add_subcommand("massey", "symbol length bound for m-fold Massey products");
  massey->add_option("--m", m, "Massey product length")->required();
  massey->add_option("--p", p, "prime");
  massey->add_flag("--exact-l", exact_l, "compute l(Ubar_m) exactly");
  add_common(massey);

  auto* oracle = app.add_subcommand(
      "oracle", "exact symbol lengths on the degree-2 cohomology ring (p odd)");
  oracle->add_option("--construction", construction_text, "construction text")->required();
  oracle->add_option("--blocks", blocks_path, "block registry JSON")->required();
  oracle->add_option("--omega", omega_arg, "comma-separated H^2 vector to query");
  oracle->add_flag("--dump-ring", dump_ring, "include the ring presentation in the report");
  add_common(oracle);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(construction_text, blocks_path, format);
    if (app.got_subcommand(lvalue)) return cmd_lvalue(group_arg, cap, threads, format);
    if (app.got_subcommand(factor)) return cmd_factor(hom_path, out_path, cap, threads);
    if (app.got_subcommand(verify)) return cmd_verify(cert_path, cap);
    if (app.got_subcommand(bounds))
      return cmd_bounds(construction_text, group_arg, blocks_path, n, p, sign, cap, threads,
                        format);
    if (app.got_subcommand(massey)) return cmd_massey(m, p, exact_l, cap, threads, format);
    if (app.got_subcommand(oracle))
      return cmd_oracle(construction_text, blocks_path, omega_arg, dump_ring, cap, format);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
