#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace etsym {

// A letter g^e of a group word.  Generator ids are "<node path>:<name>"
// where the node path is a string over {L, R, E} addressing an AST node.
struct Letter {
  std::string gen;
  std::int64_t exp = 1;
  bool operator==(const Letter& o) const { return gen == o.gen && exp == o.exp; }
};

// Free-group word; the empty word is the identity.  Words are never compared
// for equality in the group itself, only evaluated or abelianized.
struct Word {
  std::vector<Letter> letters;

  static Word one() { return {}; }
  static Word letter(std::string gen, std::int64_t exp = 1) {
    Word w;
    if (exp != 0) w.letters.push_back({std::move(gen), exp});
    return w;
  }

  bool empty() const { return letters.empty(); }
  bool operator==(const Word& o) const { return letters == o.letters; }
};

Word word_concat(const Word& a, const Word& b);
Word word_inverse(const Word& w);
Word word_pow(const Word& w, std::int64_t e);
// Merge adjacent letters with the same generator and drop zero exponents.
Word word_merge(const Word& w);
// Substitute each letter by its image word; generators absent from the table
// raise.  Used for composing generator->word maps.
Word word_substitute(const Word& w, const std::map<std::string, Word>& images);
std::string word_to_string(const Word& w);

} // namespace etsym
