#include "etsym/word.hpp"

#include <sstream>
#include <stdexcept>

namespace etsym {

Word word_concat(const Word& a, const Word& b) {
  Word w = a;
  w.letters.insert(w.letters.end(), b.letters.begin(), b.letters.end());
  return word_merge(w);
}

Word word_inverse(const Word& w) {
  Word out;
  out.letters.reserve(w.letters.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
    out.letters.push_back({it->gen, -it->exp});
  return out;
}

Word word_pow(const Word& w, std::int64_t e) {
  if (e == 0 || w.empty()) return Word::one();
  if (w.letters.size() == 1) return Word::letter(w.letters[0].gen, w.letters[0].exp * e);
  Word base = e < 0 ? word_inverse(w) : w;
  std::int64_t n = e < 0 ? -e : e;
  Word out;
  for (std::int64_t i = 0; i < n; ++i)
    out.letters.insert(out.letters.end(), base.letters.begin(), base.letters.end());
  return word_merge(out);
}

Word word_merge(const Word& w) {
  Word out;
  for (const auto& l : w.letters) {
    if (l.exp == 0) continue;
    if (!out.letters.empty() && out.letters.back().gen == l.gen) {
      out.letters.back().exp += l.exp;
      if (out.letters.back().exp == 0) out.letters.pop_back();
    } else {
      out.letters.push_back(l);
    }
  }
  return out;
}

Word word_substitute(const Word& w, const std::map<std::string, Word>& images) {
  Word out;
  for (const auto& l : w.letters) {
    auto it = images.find(l.gen);
    if (it == images.end())
      throw std::invalid_argument("word_substitute: no image for generator " + l.gen);
    Word piece = word_pow(it->second, l.exp);
    out.letters.insert(out.letters.end(), piece.letters.begin(), piece.letters.end());
  }
  return word_merge(out);
}

std::string word_to_string(const Word& w) {
  if (w.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (const auto& l : w.letters) {
    if (!first) os << ".";
    first = false;
    os << l.gen;
    if (l.exp != 1) os << "^" << l.exp;
  }
  return os.str();
}

} // namespace etsym
