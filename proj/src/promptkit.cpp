#include "rigmotion/promptkit.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rigmotion/animstring.hpp"
#include "rigmotion/errors.hpp"

namespace rigmotion {
namespace {

constexpr std::string_view kBeginBlock = "{BEGIN_DEMONSTRATION}";
constexpr std::string_view kEndBlock = "{END_DEMONSTRATION}";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

// Splits the template around the demonstration block. The marker lines and
// their line breaks are dropped.
struct BlockSplit {
  std::string head;
  std::string block;
  std::string tail;
};

BlockSplit split_block(const std::string& text) {
  const auto begin = text.find(kBeginBlock);
  const auto end = text.find(kEndBlock);
  if (begin == std::string::npos || end == std::string::npos || end < begin) {
    throw Error("TemplateError", "template needs a {BEGIN_DEMONSTRATION} ... {END_DEMONSTRATION} block");
  }
  auto skip_newline = [&](std::size_t pos) { return pos < text.size() && text[pos] == '\n' ? pos + 1 : pos; };
  const std::size_t block_start = skip_newline(begin + kBeginBlock.size());
  const std::size_t tail_start = skip_newline(end + kEndBlock.size());
  return {text.substr(0, begin), text.substr(block_start, end - block_start), text.substr(tail_start)};
}

}  // namespace

TemplateSet load_templates(const std::filesystem::path& dir) {
  return {read_file(dir / "few_shot.txt"), read_file(dir / "zero_shot.txt"), read_file(dir / "repair_animation.txt"),
          read_file(dir / "control.txt"), read_file(dir / "repair_controller.txt")};
}

std::filesystem::path default_template_dir() {
  if (const char* env = std::getenv("RIGMOTION_TEMPLATE_DIR"); env && *env) return env;
  return RIGMOTION_DEFAULT_TEMPLATE_DIR;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && (std::isupper(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        const std::string name(text.substr(i + 1, j - i - 1));
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw Error("TemplateError", "no value bound for {" + name + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

MetapromptSpec make_metaprompt_spec(PromptMode mode, const Skeleton& skeleton,
                                    std::vector<Demonstration> demonstrations, std::string user_request) {
  return {mode, skeleton.object_name(), serialize_object_json(skeleton), std::move(demonstrations),
          std::move(user_request)};
}

std::string build_metaprompt(const MetapromptSpec& spec, const TemplateSet& templates) {
  std::string object_name = spec.object_name;
  try {
    const Skeleton skeleton = parse_object_json(spec.object_json);
    if (object_name.empty()) object_name = skeleton.object_name();
  } catch (const Error& e) {
    throw Error("UnparsableObjectJson", std::string("object JSON: ") + e.what());
  }

  if (spec.mode == PromptMode::zero_shot && spec.demonstrations.size() != 1) {
    throw Error("MissingDemonstration", "zero-shot prompts take exactly one format demonstration, got " +
                                            std::to_string(spec.demonstrations.size()));
  }
  if (spec.mode == PromptMode::few_shot && spec.demonstrations.empty()) {
    throw Error("MissingDemonstration", "few-shot prompts need at least one demonstration");
  }
  for (const auto& demo : spec.demonstrations) {
    try {
      parse_animstring(demo.animation_string);
    } catch (const Error& e) {
      throw Error("UnparsableDemonstration", "demonstration '" + demo.animation_name + "': " + e.what());
    }
  }

  const std::string& text = spec.mode == PromptMode::few_shot ? templates.few_shot : templates.zero_shot;
  const BlockSplit parts = split_block(text);
  const std::map<std::string, std::string> common{
      {"OBJECT_NAME", object_name}, {"OBJECT_JSON", spec.object_json}, {"USER_REQUEST", spec.user_request}};

  std::string out = render_template(parts.head, common);
  for (const auto& demo : spec.demonstrations) {
    auto bindings = common;
    bindings["ANIMATION_NAME"] = demo.animation_name;
    bindings["ANIMATION_STRING"] = strip_trailing_newlines(demo.animation_string);
    out += render_template(parts.block, bindings);
  }
  out += render_template(parts.tail, common);
  return out;
}

BudgetReport check_budget(std::string_view prompt, std::size_t limit_tokens) {
  if (limit_tokens == 0) throw Error("InvalidArgument", "token limit must be positive");
  BudgetReport report;
  report.estimated_tokens = estimate_tokens(prompt);
  report.limit = limit_tokens;
  report.over = report.estimated_tokens > limit_tokens;
  report.remediation = {"raise the keyframe compression tolerance of the demonstrations",
                        "coarsen the quantization of demonstration numbers",
                        "drop demonstrations, starting with the last"};
  return report;
}

std::string_view to_string(PromptMode mode) { return mode == PromptMode::few_shot ? "few_shot" : "zero_shot"; }

PromptMode parse_prompt_mode(std::string_view text) {
  if (text == "few_shot") return PromptMode::few_shot;
  if (text == "zero_shot") return PromptMode::zero_shot;
  throw Error("InvalidArgument", "mode must be few_shot or zero_shot, got '" + std::string(text) + "'");
}

}  // namespace rigmotion
