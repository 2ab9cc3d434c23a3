#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ddr/rng.hpp"

namespace ddr {

struct StyleProfile;

enum class TextRole { kTitle, kAuthor, kAbstract, kHeading1, kHeading2, kHeading3, kCaption, kBody, kKeywords };

std::string_view to_string(TextRole r);

struct TextBlock {
  TextRole role = TextRole::kBody;
  std::vector<std::string> tokens;
  int target_line_count = 0;
  // Token indices that must start a new line (author blocks).
  std::vector<std::size_t> line_starts;
};

// Seeded pseudo-text over a bundled vocabulary. Immutable after
// construction, so one instance can serve many threads.
class TextSource {
 public:
  // Loads corpus.txt and names.txt from `dir`.
  explicit TextSource(const std::filesystem::path& dir);
  static TextSource bundled();

  // Token count lies in [max(1, floor(0.8 n)), max(that, floor(1.2 n))].
  // Throws ValidationError if approx_tokens < 1.
  TextBlock pseudo_text(TextRole role, int approx_tokens, RngSeed seed) const;

  // `count` lines of "Given Family, Affiliation". Throws ValidationError
  // unless 1 <= count <= 12.
  TextBlock pseudo_authors(int count, const StyleProfile& style, RngSeed seed) const;

  const std::set<std::string>& lexicon() const { return lexicon_; }

 private:
  using State = std::pair<int, int>;

  int word_id(const std::string& w);

  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
  std::map<State, std::vector<int>> next_;
  std::set<std::string> lexicon_;
  std::vector<std::string> given_;
  std::vector<std::string> family_;
  std::vector<std::string> affiliations_;
};

// Lowercase with leading/trailing punctuation removed; used for lexicon checks.
std::string normalize_token(std::string_view token);

}  // namespace ddr
