#include "ddr/textgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ddr/error.hpp"
#include "ddr/style.hpp"

namespace ddr {

namespace {

constexpr int kStart = -1;
constexpr int kEnd = -2;
constexpr double kCommaRate = 0.06;
constexpr int kMaxSentence = 28;

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open text asset " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

bool is_minor_word(const std::string& w) {
  static const char* kMinor[] = {"a", "an", "and", "the", "of", "in", "on", "for", "to", "with", "by", "or", "as", "at"};
  return std::any_of(std::begin(kMinor), std::end(kMinor), [&](const char* m) { return w == m; });
}

bool title_cased(TextRole r) {
  return r == TextRole::kTitle || r == TextRole::kHeading1 || r == TextRole::kHeading2 ||
         r == TextRole::kHeading3;
}

}  // namespace

std::string_view to_string(TextRole r) {
  switch (r) {
    case TextRole::kTitle: return "title";
    case TextRole::kAuthor: return "author";
    case TextRole::kAbstract: return "abstract";
    case TextRole::kHeading1: return "heading-1";
    case TextRole::kHeading2: return "heading-2";
    case TextRole::kHeading3: return "heading-3";
    case TextRole::kCaption: return "caption";
    case TextRole::kBody: return "body";
    case TextRole::kKeywords: return "keywords";
  }
  return "?";
}

std::string normalize_token(std::string_view token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  std::string out(token.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int TextSource::word_id(const std::string& w) {
  auto [it, inserted] = ids_.emplace(w, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(w);
  return it->second;
}

TextSource::TextSource(const std::filesystem::path& dir) {
  for (const std::string& line : read_lines(dir / "corpus.txt")) {
    std::istringstream ss(line);
    std::string w;
    State s{kStart, kStart};
    while (ss >> w) {
      w = normalize_token(w);
      if (w.empty()) continue;
      lexicon_.insert(w);
      const int id = word_id(w);
      next_[s].push_back(id);
      s = {s.second, id};
    }
    if (s.second != kStart) next_[s].push_back(kEnd);
  }
  if (words_.empty()) throw ParseError((dir / "corpus.txt").string() + ": no words");

  std::vector<std::string>* section = nullptr;
  for (const std::string& line : read_lines(dir / "names.txt")) {
    if (line == "[given]") {
      section = &given_;
    } else if (line == "[family]") {
      section = &family_;
    } else if (line == "[affiliation]") {
      section = &affiliations_;
    } else if (section != nullptr) {
      section->push_back(line);
    } else {
      throw ParseError((dir / "names.txt").string() + ": entry outside a section");
    }
  }
  if (given_.empty() || family_.empty() || affiliations_.empty()) {
    throw ParseError((dir / "names.txt").string() + ": missing [given], [family] or [affiliation] entries");
  }
}

TextSource TextSource::bundled() { return TextSource(data_dir() / "text"); }

TextBlock TextSource::pseudo_text(TextRole role, int approx_tokens, RngSeed seed) const {
  if (approx_tokens < 1) throw ValidationError("pseudo_text: approx_tokens must be >= 1");
  Rng rng = Rng(seed).fork(hash_tag(to_string(role)) ^ static_cast<std::uint64_t>(approx_tokens));

  const int lo = std::max(1, static_cast<int>(std::floor(0.8 * approx_tokens)));
  const int hi = std::max(lo, static_cast<int>(std::floor(1.2 * approx_tokens)));
  const int target = static_cast<int>(rng.uniform_int(lo, hi));

  TextBlock block;
  block.role = role;
  const bool titled = title_cased(role);
  const bool punctuated = !titled;

  State s{kStart, kStart};
  int sentence_len = 0;
  while (static_cast<int>(block.tokens.size()) < target) {
    auto it = next_.find(s);
    int id = kEnd;
    if (it != next_.end()) id = it->second[rng.index(it->second.size())];
    if (id == kEnd || sentence_len >= kMaxSentence) {
      if (punctuated && !block.tokens.empty() && block.tokens.back().back() != '.') {
        std::string& last = block.tokens.back();
        if (last.back() == ',') last.pop_back();
        last += '.';
      }
      s = {kStart, kStart};
      sentence_len = 0;
      continue;
    }
    std::string w = words_[static_cast<std::size_t>(id)];
    if (titled) {
      if (block.tokens.empty() || !is_minor_word(w)) w = capitalize(w);
    } else if (sentence_len == 0) {
      w = capitalize(w);
    }
    if (punctuated && sentence_len > 2 && !block.tokens.empty() && block.tokens.back().back() != ',' &&
        rng.bernoulli(kCommaRate)) {
      block.tokens.back() += ',';
    }
    block.tokens.push_back(std::move(w));
    s = {s.second, id};
    ++sentence_len;
  }
  if (punctuated) {
    std::string& last = block.tokens.back();
    if (last.back() == ',') last.pop_back();
    if (last.back() != '.') last += '.';
  }
  return block;
}

TextBlock TextSource::pseudo_authors(int count, const StyleProfile& style, RngSeed seed) const {
  if (count < 1 || count > 12) throw ValidationError("pseudo_authors: count must be in [1, 12]");
  Rng rng = Rng(seed).fork("authors");
  TextBlock block;
  block.role = TextRole::kAuthor;
  block.target_line_count = count;
  Caps caps = Caps::kNone;
  if (auto it = style.fonts.find(FontRole::kAuthor); it != style.fonts.end() && !it->second.empty()) {
    caps = it->second.front().caps;
  }
  for (int i = 0; i < count; ++i) {
    block.line_starts.push_back(block.tokens.size());
    std::string given = given_[rng.index(given_.size())];
    std::string family = family_[rng.index(family_.size())] + ",";
    std::string aff = affiliations_[rng.index(affiliations_.size())];
    if (caps == Caps::kAllCaps) {
      for (std::string* s : {&given, &family, &aff}) {
        for (char& c : *s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    }
    block.tokens.push_back(given);
    block.tokens.push_back(family);
    std::istringstream ss(aff);
    std::string w;
    while (ss >> w) block.tokens.push_back(w);
  }
  return block;
}

}  // namespace ddr
