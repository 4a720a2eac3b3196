// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion re-derives its expected values from first
// principles (brute force searches, exhaustive enumerations, oracles).

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

#include "etsym/bounds.hpp"
#include "etsym/cohomology.hpp"
#include "etsym/construction.hpp"
#include "etsym/fpgroup.hpp"
#include "etsym/homomorph.hpp"
#include "etsym/serial.hpp"
#include "support/corpus.hpp"

using namespace etsym;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = true;
  double seconds = 0;
  std::string detail;
};

std::vector<Criterion> results;

struct Runner {
  Criterion c;
  Clock::time_point start = Clock::now();
  std::ostringstream detail;
  bool ok = true;

  Runner(int id, std::string name) {
    c.id = id;
    c.name = std::move(name);
  }

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.str().empty()) detail << "; ";
      detail << what;
    }
  }

  void finish() {
    c.pass = ok;
    c.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    c.detail = detail.str();
    results.push_back(c);
  }
};

std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t v = 1;
  while (e--) v *= b;
  return v;
}

// --------------------------------------------------------------------------

void criterion1_goozeff_barry() {
  Runner r(1, "Goozeff-Barry reproduction: max abelian order of U_m(F_p)");
  struct Case {
    std::size_t m;
    std::uint64_t p;
  };
  for (auto [m, p] : {Case{1, 2}, Case{2, 2}, Case{2, 3}, Case{3, 2}}) {
    auto t0 = Clock::now();
    FiniteGroup um = unitriangular(m, p);
    std::uint64_t expect = ipow(p, ((m + 1) * (m + 1)) / 4);
    auto res = max_abelian_order(um);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream what;
    what << "U_" << m << "(F_" << p << "): got " << res.order << ", expected " << expect;
    r.require(res.order == expect, what.str());
    r.require(res.witness.is_abelian(), what.str() + " (witness not abelian)");
    r.require(secs <= 120.0, what.str() + " (too slow)");
  }
  // the Goozeff block witness is abelian with the exact order for m <= 4
  for (std::uint64_t p : {2, 3}) {
    for (std::size_t m = 1; m <= 4; ++m) {
      FiniteGroup um = unitriangular(m, p);
      Subgroup w = goozeff_witness(um, m, p);
      std::uint64_t expect = ipow(p, ((m + 1) * (m + 1)) / 4);
      std::ostringstream what;
      what << "goozeff witness m=" << m << " p=" << p;
      r.require(w.order() == expect, what.str() + " wrong order");
      r.require(w.is_abelian(), what.str() + " not abelian");
    }
  }
  r.finish();
}

void criterion2_lemma92() {
  Runner r(2, "l(Ubar_2(F_2)) = 2 and l(Ubar_3(F_2)) = 4, meeting the m^2/4+m-1 bound");
  struct Case {
    std::size_t m;
    unsigned expect;
  };
  for (auto [m, expect] : {Case{2, 2}, Case{3, 4}}) {
    FiniteGroup ub = bar_unitriangular(m, 2);
    unsigned l = l_value(ub);
    unsigned bound = static_cast<unsigned>((m * m) / 4 + m - 1);
    std::ostringstream what;
    what << "Ubar_" << m << "(F_2): l = " << l << ", expected " << expect << ", bound " << bound;
    r.require(l == expect, what.str());
    r.require(l <= bound, what.str() + " (exceeds bound)");
    r.require(l == bound, what.str() + " (equality expected)");
  }
  r.finish();
}

void criterion3_theorem_b() {
  Runner r(3, "Massey bound table: floor(m^2/4) + m for m = 2..8; exact l mode below them");
  const std::uint64_t expect[] = {3, 5, 8, 11, 15, 19, 24};
  for (unsigned m = 2; m <= 8; ++m) {
    std::uint64_t got = massey_symbol_bound(m, 2, MasseyMode::LemmaBound);
    std::ostringstream what;
    what << "m=" << m << ": got " << got << ", expected " << expect[m - 2];
    r.require(got == expect[m - 2], what.str());
  }
  struct Case {
    unsigned m;
    std::uint64_t p;
  };
  for (auto [m, p] : {Case{2, 2}, Case{2, 3}, Case{3, 2}}) {
    std::uint64_t exact = massey_symbol_bound(m, p, MasseyMode::ExactL);
    std::uint64_t lemma = massey_symbol_bound(m, p, MasseyMode::LemmaBound);
    std::ostringstream what;
    what << "exact_l(m=" << m << ",p=" << p << ") = " << exact << " > lemma " << lemma;
    r.require(exact <= lemma, what.str());
  }
  r.finish();
}

void criterion4_f_calculus() {
  Runner r(4, "f recursion equals the closed form (e, m <= 12; standard + 100 random tables)");
  BoundTable std2 = BoundTable::standard(2, false);
  BoundTable std3 = BoundTable::standard(3, false);
  BoundTable sign = BoundTable::standard(2, true);
  for (const auto& t : {std2, std3, sign})
    for (std::uint64_t e = 0; e <= 12; ++e)
      for (unsigned m = 0; m <= 12; ++m)
        r.require(f_bound(e, m, t) == f_bound_recursive(e, m, t), "standard table mismatch");
  std::mt19937_64 rng(20250810);
  for (int iter = 0; iter < 100; ++iter) {
    std::size_t len = 1 + rng() % 6;
    std::vector<ExtInt> vals;
    for (std::size_t i = 0; i < len; ++i) vals.push_back(ExtInt::of(rng() % 5));
    BoundTable t(vals, ExtInt::of(rng() % 3));
    for (std::uint64_t e = 0; e <= 12; ++e)
      for (unsigned m = 0; m <= 12; ++m)
        r.require(f_bound(e, m, t) == f_bound_recursive(e, m, t), "random table mismatch");
  }
  for (std::uint64_t e = 0; e <= 12; ++e)
    r.require(f_bound(e, 2, std3) == ExtInt::of(1 + e), "f(e,2) != 1 + e");
  r.finish();
}

void criterion5_factoring_pipeline() {
  Runner r(5, "factoring pipeline on 200+ (construction, hom) pairs with certificates");
  std::mt19937_64 rng(424243);
  int pairs = 0, stages_total = 0;
  for (std::uint64_t p : {2, 3}) {
    BlockRegistry reg = testsupport::standard_registry(p);
    std::vector<std::shared_ptr<const FiniteGroup>> targets;
    std::vector<GroupSpec> specs;
    auto add_custom = [&](const FiniteGroup& g) {
      GroupSpec s;
      s.kind = "custom";
      s.p = p;
      for (auto e : g.generator_indices()) {
        const FpMatrix& m = g.matrix(e);
        std::vector<std::vector<std::uint64_t>> rows(m.size(),
                                                     std::vector<std::uint64_t>(m.size()));
        for (std::size_t i = 0; i < m.size(); ++i)
          for (std::size_t j = 0; j < m.size(); ++j) rows[i][j] = m.at(i, j);
        s.generators.push_back(rows);
      }
      specs.push_back(s);
      targets.push_back(std::make_shared<const FiniteGroup>(g));
    };
    add_custom(cyclic_group(p, 1));  // Z/p
    add_custom(cyclic_group(p, 2));  // Z/p^2
    add_custom(unitriangular(2, p)); // U_2(F_p)
    if (p == 2) {
      GroupSpec s;
      s.kind = "ubar";
      s.m = 3;
      s.p = 2;
      specs.push_back(s);
      targets.push_back(std::make_shared<const FiniteGroup>(bar_unitriangular(3, 2)));
    }

    int per_prime = 110;
    for (int iter = 0; iter < per_prime; ++iter) {
      Construction c = testsupport::random_construction(rng, reg, 4, 5);
      // half the corpus is pushed to extension rank >= 3 so that the small
      // targets genuinely force multi-stage factorizations
      if (iter % 2 == 0)
        while (extension_rank(c) < 3) c = Construction::extension(c);
      std::size_t ti = rng() % targets.size();
      Hom rho = testsupport::random_valid_hom(rng, c, targets[ti]);
      if (!validate(rho).empty()) {
        r.require(false, "generated an invalid hom");
        continue;
      }
      FactorizationCertificate cert = factor_full(rho);
      ++pairs;
      stages_total += static_cast<int>(cert.stages.size());
      r.require(extension_rank(cert.final.domain) <= cert.l_bound,
                "final rank exceeds l at pair " + std::to_string(pairs));

      // stagewise identities, re-evaluated exactly on every generator
      const Hom* cur = &cert.initial;
      for (const auto& st : cert.stages) {
        GenWordMap projection = pi(st.witness, cur->domain);
        for (const auto& g : generators(cur->domain)) {
          if (evaluate(*cur, st.gamma.image(g.id)) !=
              evaluate(st.rho2, projection.image(g.id))) {
            r.require(false, "stagewise identity failed at pair " + std::to_string(pairs));
            break;
          }
        }
        cur = &st.rho2;
      }

      // serialize, reload, and run the independent verifier
      Json j = certificate_to_json(cert, reg, specs[ti]);
      auto err = verify_certificate_json(j, 1u << 16);
      if (err) r.require(false, "verify failed at pair " + std::to_string(pairs) + ": " + *err);
    }
  }
  r.require(pairs >= 200, "corpus too small: " + std::to_string(pairs));
  r.require(stages_total >= 100, "corpus exercised too few stages");
  r.detail << "pairs=" << pairs << " stages=" << stages_total;
  r.finish();
}

void criterion6_prop42_oracle() {
  Runner r(6, "normalization equivalence: collapse iff an entries-mod-p automorphism kills a Z");
  std::mt19937_64 rng(515151);
  int with = 0, without = 0;
  for (int iter = 0; iter < 200; ++iter) {
    std::uint64_t p = (iter % 2) ? 3 : 2;
    std::size_t rk = 1 + iter % 3;
    unsigned s = 1 + static_cast<unsigned>(rng() % 3);
    auto g = std::make_shared<const FiniteGroup>(elementary_abelian(p, s));

    std::string text = "F";
    for (std::size_t i = 0; i < rk; ++i) text = "<" + text + ">";
    Construction c = testsupport::parse_std(text, p);
    auto tuples = principal_tuples(c);
    const PrincipalTuple& t = tuples[0];

    std::map<std::string, FiniteGroup::Elt> images;
    for (const auto& gen : generators(c))
      images[gen.id] = gen.is_extension ? static_cast<FiniteGroup::Elt>(rng() % g->order())
                                        : FiniteGroup::kIdentity;
    Hom rho = make_hom(c, g, std::move(images));

    auto k = find_collapse(rho, t);
    auto chain = image_chain(rho, t);

    // exhaustive search over filtration automorphisms with entries mod p:
    // which coordinates Z_j can be killed at all?
    std::vector<bool> killable(rk + 1, false);
    std::vector<std::pair<std::size_t, std::size_t>> off;
    for (std::size_t col = 0; col < rk; ++col)
      for (std::size_t row = col + 1; row < rk; ++row) off.emplace_back(row, col);
    std::uint64_t diag_total = ipow(p - 1, rk), off_total = ipow(p, off.size());
    for (std::uint64_t d = 0; d < diag_total; ++d)
      for (std::uint64_t o = 0; o < off_total; ++o) {
        ZmodMatrix m(rk, p, 1);
        std::uint64_t dd = d;
        for (std::size_t i = 0; i < rk; ++i) {
          m.set(i, i, 1 + static_cast<std::int64_t>(dd % (p - 1)));
          dd /= (p - 1);
        }
        std::uint64_t oo = o;
        for (auto [row, col] : off) {
          m.set(row, col, static_cast<std::int64_t>(oo % p));
          oo /= p;
        }
        AAutMatrix alpha{m};
        for (std::size_t j = 1; j <= rk; ++j)
          if (evaluate(rho, alpha_column_word(alpha, t, j)) == FiniteGroup::kIdentity)
            killable[j] = true;
      }

    // per-index equivalence: Z_j can be killed iff the chain collapses at j-1
    bool oracle = false;
    for (std::size_t j = 1; j <= rk; ++j) {
      bool collapse_here = chain[j - 1].order() == chain[j].order();
      if (killable[j] != collapse_here) {
        std::ostringstream what;
        what << "iter " << iter << " j=" << j << ": killable=" << killable[j]
             << " collapse=" << collapse_here;
        r.require(false, what.str());
      }
      oracle = oracle || killable[j];
    }
    if (k.has_value() != oracle) {
      std::ostringstream what;
      what << "iter " << iter << ": find_collapse="
           << (k ? std::to_string(*k) : std::string("none")) << " oracle=" << oracle;
      r.require(false, what.str());
    }
    if (k) {
      r.require(killable[*k + 1], "smallest collapse index not killable");
      for (std::size_t j = 1; j + 1 <= *k + 1; ++j)
        r.require(!killable[j], "coordinate below the first collapse is killable");
    }
    (k.has_value() ? with : without)++;
  }
  r.require(with >= 20 && without >= 20, "degenerate corpus");
  r.detail << "collapse=" << with << " none=" << without;
  r.finish();
}

void criterion7_oracle_vs_bounds() {
  Runner r(7, "exact symbol lengths respect f(e, 2); product/extension laws exhaustive (p = 3)");
  std::mt19937_64 rng(626262);
  BlockRegistry reg = testsupport::standard_registry(3);

  std::vector<Construction> corpus;
  for (const char* text :
       {"D", "F", "(F * D)", "(D * D)", "<F>", "<D>", "<(F * D)>", "<<F>>", "(<D> * <F>)",
        "<(D * F)>", "(<F> * <F>)"})
    corpus.push_back(parse_construction(text, reg));
  for (int i = 0; i < 25; ++i)
    corpus.push_back(testsupport::random_construction(rng, reg, 2, 3));

  int checked = 0, skipped = 0;
  for (const auto& c : corpus) {
    CohRing ring = ring_of(c);
    if (ring.d1 > 5 || ipow(3, ring.d2) > 729 || extension_rank(c) > 2) {
      ++skipped;
      continue;
    }
    ++checked;
    BoundTable table = BoundTable::of_construction(c);
    ExtInt bound = construction_bound(c, 2, table);
    r.require(bound.is_finite(), "infinite bound on corpus construction");

    SymlScan scan = syml_scan(ring);
    r.require(scan.all_reachable, "unreachable class on " + c.print());
    r.require(scan.max_syml <= bound.v,
              "bound violated on " + c.print() + ": max " + std::to_string(scan.max_syml) +
                  " > " + bound.str());

    std::uint64_t states = ipow(3, ring.d2);
    std::vector<int> dist = syml_distances(ring);
    auto omega_at = [&](std::uint64_t idx) {
      FVec omega(ring.d2);
      std::uint64_t x = idx;
      for (std::size_t i = 0; i < ring.d2; ++i) {
        omega[i] = static_cast<std::uint8_t>(x % 3);
        x /= 3;
      }
      return omega;
    };
    // free product law at the root of products: syml = max over the factors
    if (c.root()->type == ConstructionNode::Type::FreeProduct) {
      CohRing left = ring_of(c.subtree("L"));
      CohRing right = ring_of(c.subtree("R"));
      std::vector<int> dl = syml_distances(left), dr = syml_distances(right);
      for (std::uint64_t idx = 0; idx < states; ++idx) {
        FVec omega = omega_at(idx);
        int whole = dist[idx];
        int la = dl[encode_state(restriction_to_factor(ring, omega, true), 3)];
        int lb = dr[encode_state(restriction_to_factor(ring, omega, false), 3)];
        bool okv = whole >= 0 && la >= 0 && lb >= 0 && whole == std::max(la, lb);
        if (!okv) r.require(false, "free product max law failed on " + c.print());
      }
    }
    // extension law at the root of extensions: syml <= syml(Res) + M_1(base)
    if (c.root()->type == ConstructionNode::Type::Extension) {
      CohRing base = ring_of(c.subtree("E"));
      std::vector<int> db = syml_distances(base);
      int m1 = base.d1 >= 1 ? 1 : 0;
      for (std::uint64_t idx = 0; idx < states; ++idx) {
        int whole = dist[idx];
        int res = db[encode_state(restriction_to_base(ring, omega_at(idx)), 3)];
        bool okv = whole >= 0 && res >= 0 && whole <= res + m1;
        if (!okv) r.require(false, "extension inequality failed on " + c.print());
      }
    }
  }
  r.require(checked >= 12, "too few corpus rings checked");
  r.detail << "rings=" << checked << " skipped=" << skipped;
  r.finish();
}

void criterion8_cocycle() {
  Runner r(8, "massey cocycle identity: all 64 triples of Ubar_2(F_2), 1e5 random of Ubar_3(F_2)");
  FiniteGroup ub2 = bar_unitriangular(2, 2);
  for (FiniteGroup::Elt a = 0; a < ub2.order(); ++a)
    for (FiniteGroup::Elt b = 0; b < ub2.order(); ++b)
      for (FiniteGroup::Elt c = 0; c < ub2.order(); ++c) {
        auto lhs = massey_cocycle(ub2.matrix(a), ub2.matrix(b)) +
                   massey_cocycle(ub2.matrix(ub2.mul(a, b)), ub2.matrix(c));
        auto rhs = massey_cocycle(ub2.matrix(b), ub2.matrix(c)) +
                   massey_cocycle(ub2.matrix(a), ub2.matrix(ub2.mul(b, c)));
        if (lhs % 2 != rhs % 2) r.require(false, "identity fails on Ubar_2(F_2)");
      }
  FiniteGroup ub3 = bar_unitriangular(3, 2);
  std::mt19937_64 rng(737373);
  for (int i = 0; i < 100000; ++i) {
    auto a = static_cast<FiniteGroup::Elt>(rng() % ub3.order());
    auto b = static_cast<FiniteGroup::Elt>(rng() % ub3.order());
    auto c = static_cast<FiniteGroup::Elt>(rng() % ub3.order());
    auto lhs = massey_cocycle(ub3.matrix(a), ub3.matrix(b)) +
               massey_cocycle(ub3.matrix(ub3.mul(a, b)), ub3.matrix(c));
    auto rhs = massey_cocycle(ub3.matrix(b), ub3.matrix(c)) +
               massey_cocycle(ub3.matrix(a), ub3.matrix(ub3.mul(b, c)));
    if (lhs % 2 != rhs % 2) {
      r.require(false, "identity fails on Ubar_3(F_2)");
      break;
    }
  }
  r.finish();
}

} // namespace

int main() {
  criterion1_goozeff_barry();
  criterion2_lemma92();
  criterion3_theorem_b();
  criterion4_f_calculus();
  criterion5_factoring_pipeline();
  criterion6_prop42_oracle();
  criterion7_oracle_vs_bounds();
  criterion8_cocycle();

  bool all = true;
  for (const auto& c : results) {
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", c.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.seconds, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : 1;
}
