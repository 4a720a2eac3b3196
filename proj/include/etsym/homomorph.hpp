#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "etsym/construction.hpp"
#include "etsym/fpgroup.hpp"
#include "etsym/padic.hpp"
#include "etsym/word.hpp"

namespace etsym {

// Homomorphism G(c) -> Gbar given by generator images.  Relation checking is
// always done after evaluation in the finite target; words are never compared
// in G(c) itself.
struct Hom {
  Construction domain;
  std::shared_ptr<const FiniteGroup> target;
  std::map<std::string, FiniteGroup::Elt> images;
  // Truncation precision: smallest N with exponent(target) | p^N, at least 1.
  unsigned precision = 1;
};

unsigned default_precision(const FiniteGroup& g);
Hom make_hom(Construction domain, std::shared_ptr<const FiniteGroup> target,
             std::map<std::string, FiniteGroup::Elt> images);

FiniteGroup::Elt evaluate(const Hom& rho, const Word& w);

struct Violation {
  std::string description;
  FiniteGroup::Elt value = 0; // the non-identity evaluation
};

// Checks every relation of the domain; empty result means valid.
std::vector<Violation> validate(const Hom& rho);
bool is_valid(const Hom& rho);

// rho(V^j A) for j = 0..r: closures of the images of z_{j+1}, ..., z_r.
std::vector<Subgroup> image_chain(const Hom& rho, const PrincipalTuple& t);

// Smallest 0-based k with rho(V^k) = rho(V^{k+1}); nullopt if the chain is
// strictly descending.  Never nullopt when rk(t) > l(target).
std::optional<std::size_t> find_collapse(const Hom& rho, const PrincipalTuple& t);

// The normalization automorphism: k is 1-based (kill Z_k).  Solves
// rho(u_k) = prod_{i>k} rho(u_i)^{a_i} and maps u_k to (prod u_i^{a_i})^-1 u_k.
AAutMatrix normalize_alpha(const Hom& rho, const PrincipalTuple& t, std::size_t k);

// Word representative of alpha's column k (1-based) in the tuple generators.
Word alpha_column_word(const AAutMatrix& alpha, const PrincipalTuple& t, std::size_t k);
// Abelianized exponent vector of a word over the tuple generators; throws if
// the word involves generators outside the tuple.
std::vector<std::uint64_t> abelianized_tuple_vector(const Word& w, const PrincipalTuple& t,
                                                    std::uint64_t p, unsigned precision);

// Morphism G(dbar) -> G(c) for c = <cbar>, w a witness dbar <= cbar, and beta
// an A-automorphism of the principal tuple t of c that fixes Z_r and is the
// identity mod Z_r on the coordinates of the restricted tuple.  Coincides
// with beta on those coordinates and satisfies pi_{c,cbar} o eta = iota.
GenWordMap eta_morphism(const Construction& c, const WitnessPtr& w, const PrincipalTuple& t,
                        const AAutMatrix& beta, unsigned precision);

// Extension of a pro-p pair automorphism: gamma restricting to alpha on the
// tuple subgroup Z_1 x ... x Z_r.
GenWordMap lift_automorphism(const Construction& c, const PrincipalTuple& t,
                             const AAutMatrix& alpha, unsigned precision);

// Extension of a map over an extension construction: the domain
// is <base>, the table is eta_bar plus z |-> psi.  psi must be theta-trivial.
GenWordMap extend_over_extension(const Construction& ext_domain, const GenWordMap& eta_bar,
                                 const Word& psi, unsigned precision);

// Factors rho through a subconstruction by killing Z_l (1-based); returns the
// full witness when rho(z_l) != 1.
std::pair<WitnessPtr, Hom> quotient_factor(const Hom& rho, const PrincipalTuple& t,
                                           std::size_t l);

struct FactorStage {
  PrincipalTuple tuple;
  std::size_t collapse_k = 0; // 0-based chain index from find_collapse
  AAutMatrix alpha;
  GenWordMap gamma;
  WitnessPtr witness; // c'' <= c
  Construction sub;   // c''
  Hom rho2;           // rho'' : G(c'') -> target

  FactorStage(AAutMatrix a) : alpha(std::move(a)) {}
};

// One application of the single-step factoring: requires find_collapse(rho, t)
// == k.  Postcondition: evaluate(rho, gamma(g)) == evaluate(rho2, pi(g)) for
// every generator g.
FactorStage factor_once(const Hom& rho, const PrincipalTuple& t, std::size_t k);

struct FactorizationCertificate {
  Hom initial;
  unsigned l_bound = 0; // l(target) or the supplied override
  std::vector<FactorStage> stages;
  Hom final; // domain has extension rank <= l_bound
};

// Iterated factoring until the extension rank drops to l(target); stage count
// is bounded by the number of Extension nodes of the initial domain.
FactorizationCertificate factor_full(const Hom& rho, std::optional<unsigned> l_override = {},
                                     unsigned threads = 1);

// Re-checks a certificate from its own data: validity of every Hom, the
// stagewise identities, and the final rank condition.  Returns an error
// description or nullopt on success.
std::optional<std::string> check_certificate(const FactorizationCertificate& cert);

} // namespace etsym
