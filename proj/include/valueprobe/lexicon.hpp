#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "valueprobe/errors.hpp"
#include "valueprobe/text.hpp"

namespace valueprobe {

struct LexiconCategory {
  int id = 0;
  std::string name;
};

struct LexiconEntry {
  std::string pattern;  // lowercase; wildcard entries store the prefix without the asterisk
  bool wildcard = false;
  std::vector<int> category_ids;  // non-empty, each declared in the header
};

// Raw per-category occurrence counts for one document. Counts are never
// normalized for text length.
struct CategoryCounts {
  std::vector<std::string> category_names;
  std::vector<long long> counts;
  long long token_total = 0;

  long long at(std::string_view name) const {
    for (std::size_t i = 0; i < category_names.size(); ++i)
      if (category_names[i] == name) return counts[i];
    throw validation_error("unknown category: " + std::string(name));
  }

  CategoryCounts& operator+=(const CategoryCounts& other) {
    if (category_names != other.category_names)
      throw validation_error("cannot add counts over different category sets");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    token_total += other.token_total;
    return *this;
  }
};

// Splits text into lowercase tokens: maximal runs of letters, with
// apostrophes kept only when both neighbours are letters. Typographic
// apostrophes (U+2019) are normalized to '. Everything else, including
// digits, splits tokens.
inline std::vector<std::string> tokenize(std::string_view input) {
  const std::vector<char32_t> cps = text::decode_utf8(input);
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (text::is_letter(cp)) {
      text::encode_utf8(text::to_lower(cp), current);
      continue;
    }
    const bool apostrophe = cp == U'\'' || cp == U'’';
    if (apostrophe && i > 0 && i + 1 < cps.size() && text::is_letter(cps[i - 1]) &&
        text::is_letter(cps[i + 1])) {
      current.push_back('\'');
      continue;
    }
    flush();
  }
  flush();
  return tokens;
}

// A LIWC-style category dictionary: percent-delimited header declaring
// (id, name) categories, then entry lines "pattern<TAB>id[<TAB>id...]".
// Immutable after parse; safe to share across threads.
class Lexicon {
 public:
  static Lexicon parse(std::string_view source);

  const std::vector<LexiconCategory>& categories() const { return categories_; }
  const std::vector<LexiconEntry>& entries() const { return entries_; }

  std::vector<std::string> category_names() const {
    std::vector<std::string> names;
    names.reserve(categories_.size());
    for (const auto& c : categories_) names.push_back(c.name);
    return names;
  }

  bool has_category(std::string_view name) const {
    return std::any_of(categories_.begin(), categories_.end(),
                       [&](const LexiconCategory& c) { return c.name == name; });
  }

  // Every entry a token matches: exact entries by string equality, wildcard
  // entries by prefix. A token matching both kinds yields both entries.
  std::vector<std::size_t> matching_entries(const std::string& token) const {
    std::vector<std::size_t> matches;
    if (const auto it = exact_.find(token); it != exact_.end()) matches.push_back(it->second);
    const std::size_t max_len = std::min(token.size(), max_prefix_length_);
    for (std::size_t len = 1; len <= max_len; ++len) {
      if (const auto it = prefixes_.find(token.substr(0, len)); it != prefixes_.end())
        matches.push_back(it->second);
    }
    return matches;
  }

  // Counts every entry match per token; each match increments all of that
  // entry's categories by one.
  CategoryCounts score(const std::vector<std::string>& tokens) const {
    CategoryCounts result;
    result.category_names = category_names();
    result.counts.assign(categories_.size(), 0);
    result.token_total = static_cast<long long>(tokens.size());
    for (const auto& token : tokens)
      for (const std::size_t entry : matching_entries(token)) bump(result, entry);
    return result;
  }

  CategoryCounts score_text(std::string_view input) const { return score(tokenize(input)); }

 private:
  void bump(CategoryCounts& counts, std::size_t entry_index) const {
    for (const int id : entries_[entry_index].category_ids)
      ++counts.counts[category_column_.at(id)];
  }

  std::vector<LexiconCategory> categories_;
  std::vector<LexiconEntry> entries_;
  std::unordered_map<int, std::size_t> category_column_;
  std::unordered_map<std::string, std::size_t> exact_;     // pattern -> entry index
  std::unordered_map<std::string, std::size_t> prefixes_;  // wildcard prefix -> entry index
  std::size_t max_prefix_length_ = 0;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= source.size()) {
    const std::size_t nl = source.find('\n', start);
    std::string_view line =
        nl == std::string_view::npos ? source.substr(start) : source.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

inline Error parse_error_at(std::size_t line_number, const std::string& message) {
  return validation_error("dictionary line " + std::to_string(line_number) + ": " + message);
}

}  // namespace detail

inline Lexicon Lexicon::parse(std::string_view source) {
  using detail::parse_error_at;
  Lexicon lex;
  const auto lines = detail::split_lines(source);

  std::size_t i = 0;
  const auto skip_blank = [&] {
    while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
  };

  skip_blank();
  if (i >= lines.size() || text::trim(lines[i]) != "%")
    throw parse_error_at(i + 1, "expected '%' to open the category header");
  ++i;

  std::set<std::string> seen_names;
  bool header_closed = false;
  for (; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    if (line == "%") {
      header_closed = true;
      ++i;
      break;
    }
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2)
      throw parse_error_at(i + 1, "expected 'id<TAB>name' in category header");
    int id = 0;
    const std::string_view id_text = text::trim(fields[0]);
    const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc() || ptr != id_text.data() + id_text.size())
      throw parse_error_at(i + 1, "category id is not an integer");
    const std::string name(text::trim(fields[1]));
    if (name.empty()) throw parse_error_at(i + 1, "category name is empty");
    if (lex.category_column_.contains(id))
      throw parse_error_at(i + 1, "duplicate category id " + std::to_string(id));
    if (!seen_names.insert(name).second)
      throw parse_error_at(i + 1, "duplicate category name '" + name + "'");
    lex.category_column_.emplace(id, lex.categories_.size());
    lex.categories_.push_back({id, name});
  }
  if (!header_closed) throw parse_error_at(lines.size(), "expected '%' to close the category header");

  std::set<std::pair<std::string, bool>> seen_patterns;
  for (; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() < 2)
      throw parse_error_at(i + 1, "expected 'pattern<TAB>id[<TAB>id...]'");

    LexiconEntry entry;
    std::string pattern = text::to_lower_copy(text::trim(fields[0]));
    if (pattern.ends_with('*')) {
      entry.wildcard = true;
      pattern.pop_back();
    }
    if (pattern.empty()) throw parse_error_at(i + 1, "empty pattern");
    if (pattern.find('*') != std::string::npos)
      throw parse_error_at(i + 1, "asterisk allowed only as a single trailing wildcard");
    entry.pattern = std::move(pattern);

    for (std::size_t f = 1; f < fields.size(); ++f) {
      const std::string_view id_text = text::trim(fields[f]);
      int id = 0;
      const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
      if (ec != std::errc() || ptr != id_text.data() + id_text.size())
        throw parse_error_at(i + 1, "category id is not an integer");
      if (!lex.category_column_.contains(id))
        throw parse_error_at(i + 1, "unknown category id " + std::to_string(id));
      if (std::find(entry.category_ids.begin(), entry.category_ids.end(), id) ==
          entry.category_ids.end())
        entry.category_ids.push_back(id);
    }

    if (!seen_patterns.insert({entry.pattern, entry.wildcard}).second)
      throw parse_error_at(i + 1, "duplicate entry '" + entry.pattern +
                                      (entry.wildcard ? "*'" : "'"));

    const std::size_t index = lex.entries_.size();
    if (entry.wildcard) {
      lex.max_prefix_length_ = std::max(lex.max_prefix_length_, entry.pattern.size());
      lex.prefixes_.emplace(entry.pattern, index);
    } else {
      lex.exact_.emplace(entry.pattern, index);
    }
    lex.entries_.push_back(std::move(entry));
  }
  return lex;
}

}  // namespace valueprobe
