#include "rigmotion/animstring.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"

namespace rigmotion {
namespace {

struct Line {
  std::string_view text;  // trimmed
  int number = 0;
  int column = 1;  // column of text[0]
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 1;
  while (true) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    std::size_t lead = 0;
    while (lead < raw.size() && is_space(raw[lead])) ++lead;
    lines.push_back({trim(raw), number, static_cast<int>(lead) + 1});
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
    ++number;
  }
  return lines;
}

bool is_fence(std::string_view line) { return line.substr(0, 3) == "```"; }

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// First whitespace-delimited word, upper-cased, and the trimmed remainder.
std::pair<std::string, std::string_view> keyword(std::string_view line) {
  std::size_t end = 0;
  while (end < line.size() && !is_space(line[end])) ++end;
  return {upper(line.substr(0, end)), trim(line.substr(end))};
}

std::string_view section_name(std::string_view rest) {
  if (!rest.empty() && rest.back() == ':') rest.remove_suffix(1);
  return trim(rest);
}

int column_of(const Line& line, std::string_view part) {
  return line.column + static_cast<int>(part.data() - line.text.data());
}

// Parses one or more "(a, b, ...)" groups on a line, each optionally
// followed by a comma.
std::vector<RawTuple> parse_tuples(const Line& line) {
  std::vector<RawTuple> tuples;
  std::string_view rest = line.text;
  while (!rest.empty()) {
    if (rest.front() != '(') throw SyntaxError(line.number, column_of(line, rest), "'('", std::string(rest.substr(0, 1)));
    const auto close = rest.find(')');
    if (close == std::string_view::npos) {
      throw SyntaxError(line.number, column_of(line, rest) + static_cast<int>(rest.size()), "')'");
    }
    std::string_view body = rest.substr(1, close - 1);
    RawTuple tuple;
    tuple.line = line.number;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      const std::string_view field = body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      const std::string_view number = trim(field);
      const bool last = comma == std::string_view::npos;
      if (number.empty()) {
        // A trailing comma before ')' is tolerated.
        if (last && !tuple.values.empty()) break;
        throw SyntaxError(line.number, column_of(line, field.empty() ? body.substr(start) : field), "number");
      }
      const auto value = parse_number(number);
      if (!value) throw SyntaxError(line.number, column_of(line, number), "number", std::string(number));
      tuple.values.push_back(*value);
      if (last) break;
      start = comma + 1;
    }
    tuples.push_back(std::move(tuple));
    rest = trim(rest.substr(close + 1));
    if (!rest.empty() && rest.front() == ',') rest = trim(rest.substr(1));
  }
  return tuples;
}

void write_number(std::string& out, double v, const std::optional<QuantizeSpec>& spec) {
  out += spec ? quantize(v, *spec) : format_shortest(v);
}

}  // namespace

std::string quantize(double value, const QuantizeSpec& spec) {
  return spec.mode == QuantizeSpec::Mode::significant_figures ? round_significant(value, spec.digits)
                                                              : round_decimals(value, spec.digits);
}

double quantize_value(double value, const QuantizeSpec& spec) {
  return *parse_number(quantize(value, spec));
}

AnimDocument parse_animstring(std::string_view text) {
  std::vector<Line> lines;
  for (const auto& l : split_lines(text)) {
    if (!l.text.empty() && !is_fence(l.text)) lines.push_back(l);
  }
  if (lines.empty()) throw Error("EmptyDocument", "animation string is empty");

  AnimDocument doc;
  std::size_t i = 0;
  {
    // The header may be missing; such a document is untitled.
    const auto [kw, rest] = keyword(lines[0].text);
    if (kw == "ANIMATION") {
      if (rest.empty()) throw SyntaxError(lines[0].number, lines[0].column + 9, "animation name");
      doc.name = std::string(rest);
      ++i;
    } else if (kw != "DURATION" && kw != "JOINT" && kw != "ROOT" && kw != "ROOT:") {
      throw SyntaxError(lines[0].number, lines[0].column, "ANIMATION", std::string(lines[0].text.substr(0, 20)));
    }
  }

  Section* current = nullptr;
  bool ended = false;
  for (; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (ended) throw SyntaxError(line.number, line.column, "end of input after END", std::string(line.text.substr(0, 20)));
    if (line.text.front() == '(') {
      if (!current) throw SyntaxError(line.number, line.column, "JOINT or ROOT");
      for (auto& tuple : parse_tuples(line)) {
        const int arity = current->kind == SectionKind::joint ? 5 : 4;
        if (static_cast<int>(tuple.values.size()) != arity) {
          throw ArityError(current->name, line.number, arity, static_cast<int>(tuple.values.size()));
        }
        current->tuples.push_back(std::move(tuple));
      }
      continue;
    }
    if (current && current->tuples.empty()) throw SyntaxError(line.number, line.column, "tuple");

    const auto [kw, rest] = keyword(line.text);
    if (kw == "DURATION") {
      if (!doc.sections.empty() || doc.duration) throw SyntaxError(line.number, line.column, "JOINT, ROOT or END", "DURATION");
      const auto value = parse_number(rest);
      if (!value || *value <= 0.0) {
        throw SyntaxError(line.number, column_of(line, rest), "positive duration", std::string(rest));
      }
      doc.duration = value;
    } else if (kw == "JOINT") {
      const auto name = section_name(rest);
      if (name.empty()) throw SyntaxError(line.number, line.column + 5, "joint name");
      doc.sections.push_back({SectionKind::joint, std::string(name), {}, line.number});
      current = &doc.sections.back();
    } else if (kw == "ROOT" || kw == "ROOT:") {
      doc.sections.push_back({SectionKind::root, "ROOT", {}, line.number});
      current = &doc.sections.back();
    } else if (kw == "END") {
      if (doc.sections.empty()) throw SyntaxError(line.number, line.column, "JOINT or ROOT", "END");
      ended = true;
    } else {
      throw SyntaxError(line.number, line.column, current ? "tuple, JOINT, ROOT or END" : "JOINT or ROOT",
                        std::string(line.text.substr(0, 20)));
    }
  }
  if (current && current->tuples.empty()) throw SyntaxError(lines.back().number + 1, 1, "tuple");
  if (!ended) throw SyntaxError(lines.back().number + 1, 1, "END");
  return doc;
}

Clip to_clip(const AnimDocument& doc) {
  Clip clip;
  clip.name = doc.name;
  std::map<std::string, std::size_t> track_index;
  double max_time = 0.0;
  for (const auto& section : doc.sections) {
    if (section.kind == SectionKind::root) {
      for (const auto& t : section.tuples) {
        clip.root_motion.push_back({t.values[3], {t.values[0], t.values[1], t.values[2]}});
        max_time = std::max(max_time, t.values[3]);
      }
      continue;
    }
    auto [it, inserted] = track_index.emplace(section.name, clip.rotation_tracks.size());
    if (inserted) clip.rotation_tracks.push_back({section.name, {}});
    auto& keys = clip.rotation_tracks[it->second].keys;
    for (const auto& t : section.tuples) {
      keys.push_back({t.values[4], {t.values[0], t.values[1], t.values[2], t.values[3]}});
      max_time = std::max(max_time, t.values[4]);
    }
  }
  clip.duration = doc.duration.value_or(max_time);
  if (!(clip.duration > 0.0)) {
    throw Error("InvalidDuration", "no DURATION given and every key is at t=0");
  }
  return normalize(clip);
}

AnimDocument to_document(const Clip& clip) {
  AnimDocument doc;
  doc.name = clip.name.empty() ? "Untitled" : clip.name;
  doc.duration = clip.duration;
  for (const auto& track : clip.rotation_tracks) {
    Section s{SectionKind::joint, track.joint_name, {}, 0};
    for (const auto& k : track.keys) {
      const Quaternion& q = k.rotation;
      s.tuples.push_back({{q.x, q.y, q.z, q.w, k.time}, 0});
    }
    doc.sections.push_back(std::move(s));
  }
  if (!clip.root_motion.empty()) {
    Section s{SectionKind::root, "ROOT", {}, 0};
    for (const auto& k : clip.root_motion) {
      const Vec3& v = k.translation;
      s.tuples.push_back({{v.x, v.y, v.z, k.time}, 0});
    }
    doc.sections.push_back(std::move(s));
  }
  return doc;
}

std::string serialize_document(const AnimDocument& doc, const std::optional<QuantizeSpec>& spec) {
  std::string out = "ANIMATION " + (doc.name.empty() ? std::string("Untitled") : doc.name) + "\n";
  if (doc.duration) {
    out += "DURATION ";
    write_number(out, *doc.duration, spec);
    out += "\n";
  }
  for (const auto& section : doc.sections) {
    out += section.kind == SectionKind::root ? std::string("ROOT\n") : "JOINT " + section.name + "\n";
    for (const auto& tuple : section.tuples) {
      out += '(';
      for (std::size_t i = 0; i < tuple.values.size(); ++i) {
        if (i > 0) out += ", ";
        write_number(out, tuple.values[i], spec);
      }
      out += ")\n";
    }
  }
  out += "END\n";
  return out;
}

std::string serialize_animstring(const Clip& clip, const QuantizeSpec& spec) {
  return serialize_document(to_document(clip), spec);
}

Clip quantize_clip(const Clip& clip, const QuantizeSpec& spec) {
  Clip out = clip;
  auto q = [&](double v) { return quantize_value(v, spec); };
  out.duration = q(out.duration);
  for (auto& track : out.rotation_tracks) {
    for (auto& k : track.keys) {
      k.time = q(k.time);
      k.rotation = {q(k.rotation.x), q(k.rotation.y), q(k.rotation.z), q(k.rotation.w)};
    }
  }
  for (auto& k : out.root_motion) {
    k.time = q(k.time);
    k.translation = {q(k.translation.x), q(k.translation.y), q(k.translation.z)};
  }
  out.translation_tracks.clear();
  return normalize(out);
}

std::size_t estimate_tokens(std::string_view text) { return (utf8_length(text) + 3) / 4; }

}  // namespace rigmotion
