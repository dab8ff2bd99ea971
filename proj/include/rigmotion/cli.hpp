#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rigmotion/animstring.hpp"
#include "rigmotion/llm_bridge.hpp"

namespace rigmotion {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitGeneration = 2, kExitIo = 3 };

// One source of settings. Unset fields fall through to the next layer.
struct ConfigLayer {
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<double> temperature;
  std::optional<int> max_retries;
  std::optional<double> timeout;
  std::optional<std::filesystem::path> template_dir;
  std::optional<std::filesystem::path> store_dir;
  std::optional<int> sig_figs;
};

struct CliConfig {
  LlmConfig llm;
  std::filesystem::path template_dir;
  std::filesystem::path store_dir = "rigmotion-store";
  QuantizeSpec quantize = QuantizeSpec::llm();
};

// Environment layer: RIGMOTION_ENDPOINT, RIGMOTION_MODEL, RIGMOTION_TEMPERATURE,
// RIGMOTION_MAX_RETRIES, RIGMOTION_TIMEOUT, RIGMOTION_TEMPLATE_DIR,
// RIGMOTION_STORE, RIGMOTION_SIG_FIGS. Throws Error("ConfigError").
ConfigLayer config_from_env(const std::function<const char*(const char*)>& getenv);

// JSON object with keys endpoint, model, temperature, max_retries, timeout,
// template_dir, store, sig_figs. Throws Error("IoError") or Error("ConfigError").
ConfigLayer config_from_file(const std::filesystem::path& path);

// flags > env > file > built-in default. The API key only ever comes from
// RIGMOTION_API_KEY.
CliConfig merge_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file,
                       std::string api_key);

// Runs one command line (args[0] is the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace rigmotion
