#include <doctest.h>

#include <regex>

#include "support/paths.hpp"
#include "valueprobe/probes.hpp"

using valueprobe::build_probes;
using valueprobe::clean_response;
using valueprobe::Error;
using valueprobe::FineType;
using valueprobe::ProbeKind;
using valueprobe::ValueSpec;

namespace {

ValueSpec tiny_spec() {
  ValueSpec spec;
  spec.circle_order = valueprobe::circle_order_vector();
  spec.fine_types.push_back(
      {"Security—Personal", "SE", {"staying safe at home", "watching for danger"},
       "safety in daily surroundings", "Security—Personal"});
  spec.fine_types.push_back(
      {"Hedonism", "HE", {"enjoying good food"}, "pleasure for oneself", "Hedonism"});
  spec.fine_types.push_back({"Face", "unmapped", {"keeping up appearances"},
                             "public image", "Face"});
  return spec;
}

}  // namespace

TEST_SUITE("probes.valuespec") {
  TEST_CASE("the bundled example spec satisfies the full-instrument shape") {
    const ValueSpec spec = ValueSpec::load(testpaths::data("valuespec.example.json"));
    CHECK(spec.fine_types.size() == 19);
    CHECK(spec.item_count() == 57);
    CHECK(spec.circle_order.size() == 10);
    std::size_t mapped = 0, unmapped = 0;
    for (const auto& ft : spec.fine_types) (ft.mapped() ? mapped : unmapped)++;
    CHECK(mapped == 17);
    CHECK(unmapped == 2);
  }

  TEST_CASE("validation rejects broken specs") {
    ValueSpec spec = tiny_spec();
    spec.circle_order.pop_back();
    CHECK_THROWS_AS(spec.validate(), Error);

    spec = tiny_spec();
    spec.circle_order[0] = "XX";
    CHECK_THROWS_AS(spec.validate(), Error);

    spec = tiny_spec();
    spec.fine_types[1].parent_value = "ZZ";
    CHECK_THROWS_AS(spec.validate(), Error);

    spec = tiny_spec();
    spec.fine_types.push_back(spec.fine_types[0]);
    CHECK_THROWS_AS(spec.validate(), Error);

    spec = tiny_spec();
    spec.fine_types[0].id = "bad,id";
    CHECK_THROWS_AS(spec.validate(), Error);
  }
}

TEST_SUITE("probes.build") {
  TEST_CASE("item prompts use the template verbatim and keep spec order") {
    const auto probes = build_probes(tiny_spec(), ProbeKind::item);
    REQUIRE(probes.prompts.size() == 4);
    CHECK(probes.prompts[0].prompt_text == "Elaborate on: staying safe at home");
    CHECK(probes.prompts[0].fine_type_id == "Security—Personal");
    CHECK(probes.prompts[3].fine_type_id == "Face");
    for (const auto& p : probes.prompts)
      CHECK(p.prompt_text.rfind("Elaborate on: ", 0) == 0);
  }

  TEST_CASE("name prompts: one per fine type") {
    const ValueSpec spec = ValueSpec::load(testpaths::data("valuespec.example.json"));
    const auto names = build_probes(spec, ProbeKind::name);
    CHECK(names.prompts.size() == 19);
    const auto defs = build_probes(spec, ProbeKind::definition);
    CHECK(defs.prompts.size() == 19);
    const auto items = build_probes(spec, ProbeKind::item);
    CHECK(items.prompts.size() == 57);
  }

  TEST_CASE("a fine type with no items simply contributes no prompts") {
    ValueSpec spec = tiny_spec();
    spec.fine_types[1].item_texts.clear();
    const auto probes = build_probes(spec, ProbeKind::item);
    CHECK(probes.prompts.size() == 3);
  }

  TEST_CASE("missing definition or name text is a configuration error") {
    ValueSpec spec = tiny_spec();
    spec.fine_types[1].definition_text.clear();
    CHECK_THROWS_AS(build_probes(spec, ProbeKind::definition), Error);
    spec = tiny_spec();
    spec.fine_types[2].name_text.clear();
    CHECK_THROWS_AS(build_probes(spec, ProbeKind::name), Error);
  }
}

TEST_SUITE("probes.clean") {
  TEST_CASE("boilerplate first sentence is removed") {
    CHECK(clean_response("As an AI language model, I do not hold views. Independence matters.") ==
          "Independence matters.");
    CHECK(clean_response("As a sentient AI I reflect. Values guide action.") ==
          "Values guide action.");
  }

  TEST_CASE("text without the pattern is unchanged") {
    const std::string text = "Independence means forming views alone.";
    CHECK(clean_response(text) == text);
  }

  TEST_CASE("the whole text counts as one sentence when no terminator exists") {
    CHECK(clean_response("As an AI language model I ramble on without punctuation") == "");
    CHECK(clean_response("no pattern and no punctuation") ==
          "no pattern and no punctuation");
  }

  TEST_CASE("agrees with a reference regular-expression pass over the first sentence") {
    const std::regex pattern(std::string(valueprobe::kPretextPattern));
    const std::vector<std::string> cases = {
        "As an AI language model, nothing follows. Tail one.",
        "language model AI speaking! Tail two.",
        "As AI, brevity. Tail three?",
        "The As AI, marker sits mid-sentence. Tail four.",
        "Harmless opener. As an AI language model, second sentence stays.",
        "No marker at all. Regular text.",
    };
    for (const auto& text : cases) {
      CAPTURE(text);
      const std::size_t term = text.find_first_of(".!?");
      const std::string first =
          term == std::string::npos ? text : text.substr(0, term + 1);
      const bool should_strip = std::regex_search(first, pattern);
      const std::string cleaned = clean_response(text);
      if (should_strip)
        CHECK(cleaned == [&] {
          std::string rest = term == std::string::npos ? "" : text.substr(term + 1);
          while (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
          return rest;
        }());
      else
        CHECK(cleaned == text);
    }
  }

  TEST_CASE("single pass only: a matching second sentence survives one call") {
    const std::string text =
        "As an AI language model, first. As an AI language model, second. Third.";
    const std::string once = clean_response(text);
    CHECK(once == "As an AI language model, second. Third.");
    CHECK(clean_response(once) == "Third.");
  }
}
