#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "etsym/bounds.hpp"
#include "etsym/cohomology.hpp"
#include "etsym/construction.hpp"
#include "etsym/fpgroup.hpp"
#include "etsym/homomorph.hpp"

namespace etsym {

using Json = nlohmann::ordered_json;

// --- block registry -------------------------------------------------------
// [{id, kind, p, theta?, presentation?: {generators, relations}, bounds?,
//   ring?: {d1, d2, cup: [[i, j, [coeffs]]]}}]
Json registry_to_json(const BlockRegistry& reg);
BlockRegistry registry_from_json(const Json& j);

Json word_to_json(const Word& w);
Word word_from_json(const Json& j);

// --- group specs ----------------------------------------------------------
// {kind: "um"|"ubar", m, p} or {kind: "custom", p, generators: [matrix]}
// or the inline forms "um:M,P" / "ubar:M,P".
struct GroupSpec {
  std::string kind; // um | ubar | custom
  std::size_t m = 0;
  std::uint64_t p = 2;
  std::vector<std::vector<std::vector<std::uint64_t>>> generators; // custom
};

GroupSpec group_spec_from_json(const Json& j);
GroupSpec group_spec_from_inline(const std::string& text);
Json group_spec_to_json(const GroupSpec& s);
std::shared_ptr<const FiniteGroup> build_group(const GroupSpec& s, std::size_t cap);

Json matrix_to_json(const FpMatrix& m);

// --- homomorphism files -----------------------------------------------------
// {blocks, construction, target, images: {gen id -> matrix}}
struct HomFile {
  BlockRegistry blocks;
  std::string construction_text;
  GroupSpec target;
  Hom hom;
};

HomFile hom_from_json(const Json& j, std::size_t cap);
Json hom_to_json(const Hom& rho, const BlockRegistry& blocks, const GroupSpec& target);

// --- factorization certificates ---------------------------------------------
Json certificate_to_json(const FactorizationCertificate& cert, const BlockRegistry& blocks,
                         const GroupSpec& target);
FactorizationCertificate certificate_from_json(const Json& j, std::size_t cap);

// Full re-verification from serialized data; nullopt on success.
std::optional<std::string> verify_certificate_json(const Json& j, std::size_t cap);

// --- reports ----------------------------------------------------------------
Json subgroup_to_json(const Subgroup& s);
Json ring_to_json(const CohRing& r);

} // namespace etsym
