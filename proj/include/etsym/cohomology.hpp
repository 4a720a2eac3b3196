#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etsym/construction.hpp"

namespace etsym {

using FVec = std::vector<std::uint8_t>; // vector over F_p

// Degree <= 2 cohomology ring presentation: H^1 and H^2 dimensions and the
// cup pairing H^1 x H^1 -> H^2 on basis elements.  p odd only; for p = 2 the
// square of the beta class in extension rings is not determined by the data
// we model, so the oracle rejects it.
struct CohRing {
  std::uint64_t p = 3;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::vector<std::vector<FVec>> cup; // cup[i][j] in F_p^{d2}, alternating
  std::vector<std::string> h1_labels;
  std::vector<std::string> h2_labels;

  // extension rings: H^1 = inflated base H^1 + {beta} (beta last),
  // H^2 = inflated base H^2 + {beta u Inf(chi_i)}
  struct ExtensionInfo {
    std::size_t base_d1 = 0;
    std::size_t base_d2 = 0;
  };
  std::optional<ExtensionInfo> ext;

  // connected sums: H^1 and H^2 are the left block followed by the right
  struct ProductInfo {
    std::size_t left_d1 = 0;
    std::size_t left_d2 = 0;
  };
  std::optional<ProductInfo> prod;

  FVec cup_of(const FVec& a, const FVec& b) const; // bilinear extension
  void check_alternating() const;                  // throws on violation
};

CohRing block_ring(const BlockSpec& b);
CohRing free_product_ring(const CohRing& a, const CohRing& b);
CohRing extension_ring(const CohRing& base);
CohRing ring_of(const Construction& c);

// Res to the base of an extension ring: keeps the inflated H^2 coordinates.
FVec restriction_to_base(const CohRing& r, const FVec& omega);
// Res to one factor of a connected sum.
FVec restriction_to_factor(const CohRing& r, const FVec& omega, bool left);
// Inf from the base of an extension ring.
FVec inflate_from_base(const CohRing& r, const FVec& base_omega);

struct SymlCaps {
  std::size_t state_cap = 59049;  // 3^10 states in F_p^{d2}
  std::size_t symbol_cap = 59049; // p^{2 d1} pairs
};

// All values a u b, deduplicated, zero excluded.
std::vector<FVec> enumerate_symbols(const CohRing& r, const SymlCaps& caps = {});

// Exact symbol length by breadth-first sumset closure over F_p^{d2};
// nullopt when the closure stabilizes without reaching omega.
std::optional<unsigned> syml_exact(const CohRing& r, const FVec& omega,
                                   const SymlCaps& caps = {});

// Distances for every class at once (-1 = unreachable); index encoding is
// little-endian base p over the H^2 coordinates.
std::vector<int> syml_distances(const CohRing& r, const SymlCaps& caps = {});
std::size_t encode_state(const FVec& v, std::uint64_t p);

// max syml over all of H^2 (full enumeration); any unreachable class gives
// nullopt in .second.
struct SymlScan {
  bool all_reachable = true;
  unsigned max_syml = 0;
  FVec argmax;
};
SymlScan syml_scan(const CohRing& r, const SymlCaps& caps = {});

// Test oracle: can omega be written as a sum of exactly k symbols?
bool representable_by_k_symbols(const CohRing& r, const FVec& omega, unsigned k,
                                const SymlCaps& caps = {});

} // namespace etsym
