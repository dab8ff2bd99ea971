#pragma once

// Animation string codec, grammar v1:
//
//   ANIMATION <name>
//   DURATION <seconds>          (optional)
//   JOINT <joint>               one or more sections
//   (x, y, z, w, t)             one tuple per line
//   ROOT
//   (x, y, z, t)
//   END
//
// See docs/formats.md for the full grammar and the tolerated deviations.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rigmotion/clip.hpp"

namespace rigmotion {

enum class SectionKind { joint, root };

// Numbers exactly as written; the last value is the time stamp.
struct RawTuple {
  std::vector<double> values;
  int line = 0;
};

struct Section {
  SectionKind kind = SectionKind::joint;
  std::string name;  // "ROOT" for root sections
  std::vector<RawTuple> tuples;
  int line = 0;
};

struct AnimDocument {
  std::string name;
  std::optional<double> duration;
  std::vector<Section> sections;
};

struct QuantizeSpec {
  enum class Mode { significant_figures, decimal_places };

  Mode mode = Mode::decimal_places;
  int digits = 4;

  // One significant figure, the setting used when exchanging with a model.
  static constexpr QuantizeSpec llm() { return {Mode::significant_figures, 1}; }
  static constexpr QuantizeSpec archival() { return {Mode::decimal_places, 4}; }
};

// Rounds half away from zero at the requested precision. This differs from
// digit chopping: 0.04678 at one significant figure becomes 0.05, not 0.04.
std::string quantize(double value, const QuantizeSpec& spec);
double quantize_value(double value, const QuantizeSpec& spec);

// Throws SyntaxError, ArityError, or Error("EmptyDocument").
AnimDocument parse_animstring(std::string_view text);

// Joint sections become rotation tracks (repeated sections are merged), ROOT
// becomes root motion, and the result goes through normalize(). Throws
// Error("DegenerateRotation") or Error("InvalidDuration").
Clip to_clip(const AnimDocument& doc);

AnimDocument to_document(const Clip& clip);

// Canonical layout. Numbers are quantized when a spec is given, otherwise
// written in shortest round-trip form.
std::string serialize_document(const AnimDocument& doc,
                               const std::optional<QuantizeSpec>& spec = std::nullopt);

std::string serialize_animstring(const Clip& clip, const QuantizeSpec& spec);

// What a clip becomes after a serialize/parse/to_clip round trip: every
// number quantized, then normalize().
Clip quantize_clip(const Clip& clip, const QuantizeSpec& spec);

// ceil(code points / 4). A heuristic, not a tokenizer.
std::size_t estimate_tokens(std::string_view text);

}  // namespace rigmotion
