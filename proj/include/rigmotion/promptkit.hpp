#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rigmotion/skeleton.hpp"

namespace rigmotion {

// Prompt templates read from disk. Placeholders are written {NAME}; the lines
// {BEGIN_DEMONSTRATION} and {END_DEMONSTRATION} delimit a block repeated once
// per demonstration.
struct TemplateSet {
  std::string few_shot;
  std::string zero_shot;
  std::string repair_animation;
  std::string control;
  std::string repair_controller;
};

// Reads few_shot.txt, zero_shot.txt, repair_animation.txt, control.txt and
// repair_controller.txt. Throws Error("IoError").
TemplateSet load_templates(const std::filesystem::path& dir);

// $RIGMOTION_TEMPLATE_DIR when set, otherwise the directory baked in at build time.
std::filesystem::path default_template_dir();

// Single-pass substitution: text inserted for one placeholder is never
// rescanned. Throws Error("TemplateError") for a placeholder with no binding.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& bindings);

struct Demonstration {
  std::string animation_name;    // natural-language description
  std::string animation_string;  // grammar v1 text
};

enum class PromptMode { few_shot, zero_shot };

struct MetapromptSpec {
  PromptMode mode = PromptMode::few_shot;
  std::string object_name;
  std::string object_json;
  // few_shot: one or more on the target object. zero_shot: exactly one, on
  // a different object, shown for format only.
  std::vector<Demonstration> demonstrations;
  std::string user_request;
};

MetapromptSpec make_metaprompt_spec(PromptMode mode, const Skeleton& skeleton,
                                    std::vector<Demonstration> demonstrations, std::string user_request);

// Throws Error with code UnparsableObjectJson, UnparsableDemonstration,
// MissingDemonstration or TemplateError.
std::string build_metaprompt(const MetapromptSpec& spec, const TemplateSet& templates);

struct BudgetReport {
  std::size_t estimated_tokens = 0;
  std::size_t limit = 0;
  bool over = false;
  // What to try, in order, when a prompt is over the limit.
  std::vector<std::string> remediation;
};

BudgetReport check_budget(std::string_view prompt, std::size_t limit_tokens);

std::string_view to_string(PromptMode mode);
// Throws Error("InvalidArgument").
PromptMode parse_prompt_mode(std::string_view text);

}  // namespace rigmotion
