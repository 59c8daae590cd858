#pragma once

#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "valueprobe/errors.hpp"
#include "valueprobe/text.hpp"
#include "valueprobe/values.hpp"

namespace valueprobe {

inline constexpr std::string_view kPromptPrefix = "Elaborate on: ";

// Boilerplate openers that get the first sentence of a response removed.
inline constexpr std::string_view kPretextPattern =
    "AI language model,|As AI,|As a sentient AI|language model AI|As an AI";

struct FineType {
  std::string id;
  std::string parent_value;  // a value code, or "unmapped" for types outside the ten categories
  std::vector<std::string> item_texts;
  std::string definition_text;
  std::string name_text;

  bool mapped() const { return parent_value != "unmapped"; }
};

// The probe source: fine-grained value types with their item, definition and
// name texts, plus the circular order used for targets and expected profiles.
struct ValueSpec {
  std::vector<FineType> fine_types;
  std::vector<std::string> circle_order;

  static ValueSpec from_json(const nlohmann::json& j);
  static ValueSpec load(const std::string& path);

  const FineType* find(std::string_view id) const {
    for (const auto& ft : fine_types)
      if (ft.id == id) return &ft;
    return nullptr;
  }

  std::size_t item_count() const {
    std::size_t n = 0;
    for (const auto& ft : fine_types) n += ft.item_texts.size();
    return n;
  }

  void validate() const {
    if (circle_order.size() != kValueCount)
      throw config_error("value spec: circle_order must list all " +
                         std::to_string(kValueCount) + " value codes");
    std::set<std::string> order(circle_order.begin(), circle_order.end());
    if (order.size() != kValueCount)
      throw config_error("value spec: circle_order contains duplicates");
    for (const auto& code : circle_order)
      if (!is_value_code(code))
        throw config_error("value spec: unknown value code '" + code + "' in circle_order");
    std::set<std::string> ids;
    for (const auto& ft : fine_types) {
      if (ft.id.empty()) throw config_error("value spec: fine type with empty id");
      if (ft.id.find_first_of(",\n\r") != std::string::npos)
        throw config_error("value spec: fine type id '" + ft.id +
                           "' must not contain commas or line breaks");
      if (!ids.insert(ft.id).second)
        throw config_error("value spec: duplicate fine type id '" + ft.id + "'");
      if (ft.parent_value != "unmapped" && !order.contains(ft.parent_value))
        throw config_error("value spec: fine type '" + ft.id + "' has unknown parent '" +
                           ft.parent_value + "'");
    }
  }
};

inline ValueSpec ValueSpec::from_json(const nlohmann::json& j) {
  ValueSpec spec;
  try {
    for (const auto& code : j.at("circle_order"))
      spec.circle_order.push_back(code.get<std::string>());
    for (const auto& jt : j.at("fine_types")) {
      FineType ft;
      ft.id = jt.at("id").get<std::string>();
      ft.parent_value = jt.at("parent_value").get<std::string>();
      if (jt.contains("items"))
        for (const auto& item : jt["items"]) ft.item_texts.push_back(item.get<std::string>());
      if (jt.contains("definition")) ft.definition_text = jt["definition"].get<std::string>();
      if (jt.contains("name")) ft.name_text = jt["name"].get<std::string>();
      spec.fine_types.push_back(std::move(ft));
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("value spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline ValueSpec ValueSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open value spec file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("value spec '" + path + "': " + e.what());
  }
  return from_json(j);
}

enum class ProbeKind { item, definition, name };

inline std::string_view to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::item: return "item";
    case ProbeKind::definition: return "definition";
    case ProbeKind::name: return "name";
  }
  return "item";
}

inline ProbeKind probe_kind_from_string(std::string_view s) {
  if (s == "item" || s == "items") return ProbeKind::item;
  if (s == "definition" || s == "definitions") return ProbeKind::definition;
  if (s == "name" || s == "names") return ProbeKind::name;
  throw config_error("unknown probe kind '" + std::string(s) + "'");
}

struct Probe {
  std::string fine_type_id;
  std::string prompt_text;
};

struct ProbeSet {
  ProbeKind kind = ProbeKind::item;
  std::vector<Probe> prompts;
};

// One prompt per item, definition, or name, in spec order, each prefixed
// with the fixed elaboration template.
inline ProbeSet build_probes(const ValueSpec& spec, ProbeKind kind) {
  ProbeSet set;
  set.kind = kind;
  for (const auto& ft : spec.fine_types) {
    switch (kind) {
      case ProbeKind::item:
        for (const auto& item : ft.item_texts)
          set.prompts.push_back({ft.id, std::string(kPromptPrefix) + item});
        break;
      case ProbeKind::definition:
        if (ft.definition_text.empty())
          throw config_error("fine type '" + ft.id + "' has no definition text");
        set.prompts.push_back({ft.id, std::string(kPromptPrefix) + ft.definition_text});
        break;
      case ProbeKind::name:
        if (ft.name_text.empty())
          throw config_error("fine type '" + ft.id + "' has no name text");
        set.prompts.push_back({ft.id, std::string(kPromptPrefix) + ft.name_text});
        break;
    }
  }
  return set;
}

// Removes a boilerplate first sentence. The first sentence runs up to and
// including the first '.', '!' or '?' (the whole text when none occurs); it
// is dropped when the pre-text pattern matches anywhere inside it. Single
// pass: a matching second sentence survives one call.
inline std::string clean_response(std::string_view raw) {
  static const std::regex pretext{std::string(kPretextPattern)};
  const std::size_t terminator = raw.find_first_of(".!?");
  const std::size_t sentence_end =
      terminator == std::string_view::npos ? raw.size() : terminator + 1;
  const std::string_view first_sentence = raw.substr(0, sentence_end);
  if (!std::regex_search(first_sentence.begin(), first_sentence.end(), pretext))
    return std::string(raw);
  std::string_view rest = raw.substr(sentence_end);
  while (!rest.empty() &&
         (rest.front() == ' ' || rest.front() == '\t' || rest.front() == '\n' ||
          rest.front() == '\r'))
    rest.remove_prefix(1);
  return std::string(rest);
}

}  // namespace valueprobe
