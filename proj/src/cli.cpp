#include "rigmotion/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rigmotion/clip.hpp"
#include "rigmotion/compress.hpp"
#include "rigmotion/control.hpp"
#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"
#include "rigmotion/kinematics.hpp"
#include "rigmotion/promptkit.hpp"
#include "rigmotion/service.hpp"
#include "rigmotion/skeleton.hpp"

namespace rigmotion {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
std::optional<T> env_number(const std::function<const char*(const char*)>& getenv, const char* name) {
  const char* raw = getenv(name);
  if (!raw || !*raw) return std::nullopt;
  const auto v = parse_number(raw);
  if (!v || (std::is_integral_v<T> && *v != static_cast<double>(static_cast<T>(*v)))) {
    throw Error("ConfigError", std::string(name) + " is not a valid number: '" + raw + "'");
  }
  return static_cast<T>(*v);
}

std::optional<std::string> env_string(const std::function<const char*(const char*)>& getenv, const char* name) {
  const char* raw = getenv(name);
  if (!raw || !*raw) return std::nullopt;
  return std::string(raw);
}

template <typename T>
void merge_field(std::optional<T>& into, const std::optional<T>& from) {
  if (!into && from) into = from;
}

// Where command input comes from: a positional path, --in, or stdin.
struct InputSource {
  std::string positional;
  std::string in_flag;

  std::string read(std::istream& stdin_stream) const {
    const std::string& path = !positional.empty() ? positional : in_flag;
    if (path.empty() || path == "-") {
      std::ostringstream ss;
      ss << stdin_stream.rdbuf();
      return ss.str();
    }
    return read_file(path);
  }
};

void write_output(const std::string& out_path, std::ostream& out, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
  if (!file || !(file << text) || !file.flush()) throw Error("IoError", "cannot write " + out_path);
}

// Animation inputs are grammar v1 text or, when they start with '{', clip JSON.
Clip load_clip(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_clip_json(text);
  return to_clip(parse_animstring(text));
}

std::vector<Demonstration> load_demos(const std::vector<std::string>& specs) {
  std::vector<Demonstration> demos;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error("InvalidArgument", "--demo expects <name>=<file>, got '" + spec + "'");
    }
    demos.push_back({spec.substr(0, eq), read_file(spec.substr(eq + 1))});
  }
  return demos;
}

int exit_code_for(const Error& e) {
  const std::string& code = e.code();
  if (code == "IoError") return kExitIo;
  if (code == "NoValidAnimation" || code == "NoValidController" || code == "TransportError" ||
      code == "AuthError") {
    return kExitGeneration;
  }
  return kExitUsage;
}

std::unique_ptr<Transport> make_transport(const std::string& mock_dir, const LlmConfig& llm) {
  if (!mock_dir.empty()) return std::make_unique<ReplayTransport>(mock_dir);
  return std::make_unique<HttpTransport>(llm);
}

}  // namespace

ConfigLayer config_from_env(const std::function<const char*(const char*)>& getenv) {
  ConfigLayer layer;
  layer.endpoint = env_string(getenv, "RIGMOTION_ENDPOINT");
  layer.model = env_string(getenv, "RIGMOTION_MODEL");
  layer.temperature = env_number<double>(getenv, "RIGMOTION_TEMPERATURE");
  layer.max_retries = env_number<int>(getenv, "RIGMOTION_MAX_RETRIES");
  layer.timeout = env_number<double>(getenv, "RIGMOTION_TIMEOUT");
  if (auto v = env_string(getenv, "RIGMOTION_TEMPLATE_DIR")) layer.template_dir = *v;
  if (auto v = env_string(getenv, "RIGMOTION_STORE")) layer.store_dir = *v;
  layer.sig_figs = env_number<int>(getenv, "RIGMOTION_SIG_FIGS");
  return layer;
}

ConfigLayer config_from_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("ConfigError", path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error("ConfigError", path.string() + ": expected a JSON object");
  if (doc.contains("api_key")) {
    throw Error("ConfigError", path.string() + ": api_key is read from RIGMOTION_API_KEY only");
  }
  ConfigLayer layer;
  try {
    if (doc.contains("endpoint")) layer.endpoint = doc["endpoint"].get<std::string>();
    if (doc.contains("model")) layer.model = doc["model"].get<std::string>();
    if (doc.contains("temperature")) layer.temperature = doc["temperature"].get<double>();
    if (doc.contains("max_retries")) layer.max_retries = doc["max_retries"].get<int>();
    if (doc.contains("timeout")) layer.timeout = doc["timeout"].get<double>();
    if (doc.contains("template_dir")) layer.template_dir = doc["template_dir"].get<std::string>();
    if (doc.contains("store")) layer.store_dir = doc["store"].get<std::string>();
    if (doc.contains("sig_figs")) layer.sig_figs = doc["sig_figs"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("ConfigError", path.string() + ": " + e.what());
  }
  return layer;
}

CliConfig merge_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file,
                       std::string api_key) {
  ConfigLayer m = flags;
  for (const ConfigLayer* lower : {&env, &file}) {
    merge_field(m.endpoint, lower->endpoint);
    merge_field(m.model, lower->model);
    merge_field(m.temperature, lower->temperature);
    merge_field(m.max_retries, lower->max_retries);
    merge_field(m.timeout, lower->timeout);
    merge_field(m.template_dir, lower->template_dir);
    merge_field(m.store_dir, lower->store_dir);
    merge_field(m.sig_figs, lower->sig_figs);
  }
  CliConfig cfg;
  if (m.endpoint) cfg.llm.endpoint_url = *m.endpoint;
  if (m.model) cfg.llm.model_id = *m.model;
  if (m.temperature) cfg.llm.temperature = *m.temperature;
  if (m.max_retries) cfg.llm.max_retries = *m.max_retries;
  if (m.timeout) cfg.llm.timeout_seconds = *m.timeout;
  cfg.llm.api_key = std::move(api_key);
  cfg.template_dir = m.template_dir ? *m.template_dir : std::filesystem::path(RIGMOTION_DEFAULT_TEMPLATE_DIR);
  if (m.store_dir) cfg.store_dir = *m.store_dir;
  if (m.sig_figs) {
    if (*m.sig_figs < 1 || *m.sig_figs > 17) throw Error("ConfigError", "sig_figs must be in [1, 17]");
    cfg.quantize = {QuantizeSpec::Mode::significant_figures, *m.sig_figs};
  }
  cfg.llm.check();
  return cfg;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural-language rigged animation toolkit", "rigmotion"};
  app.require_subcommand(1);

  std::string config_path;
  ConfigLayer flags;
  std::string out_path;
  app.add_option("--config", config_path, "JSON config file (default $RIGMOTION_CONFIG)");

  auto add_llm_flags = [&flags](CLI::App* cmd) {
    cmd->add_option("--endpoint", flags.endpoint, "Chat-completions endpoint URL");
    cmd->add_option("--model", flags.model, "Model id");
    cmd->add_option("--temperature", flags.temperature, "Sampling temperature");
    cmd->add_option("--max-retries", flags.max_retries, "Repair turns after the first attempt");
    cmd->add_option("--timeout", flags.timeout, "Request timeout in seconds");
  };
  auto add_io = [&out_path](CLI::App* cmd, InputSource& src, const char* what) {
    cmd->add_option("input", src.positional, std::string(what) + " file (default stdin)");
    cmd->add_option("--in", src.in_flag, std::string(what) + " file");
    cmd->add_option("--out", out_path, "Output file (default stdout)");
  };

  InputSource src;
  std::string skeleton_path;

  auto* validate = app.add_subcommand("validate", "Check an animation against a skeleton");
  add_io(validate, src, "Animation");
  validate->add_option("--skeleton", skeleton_path, "Object JSON")->required();

  auto* fmt = app.add_subcommand("fmt", "Canonical re-serialization of an animation string");
  add_io(fmt, src, "Animation");

  double tolerance = 0.01;
  auto* compress_cmd = app.add_subcommand("compress", "Drop redundant keys and quantize");
  add_io(compress_cmd, src, "Animation");
  compress_cmd->add_option("--tolerance", tolerance, "Max angular error in radians")->capture_default_str();
  compress_cmd->add_option("--sig-figs", flags.sig_figs, "Significant figures per number");

  double fps = 30.0;
  std::string edge = "clamp";
  auto* sample_cmd = app.add_subcommand("sample", "World-space pose series as CSV");
  add_io(sample_cmd, src, "Animation");
  sample_cmd->add_option("--skeleton", skeleton_path, "Object JSON")->required();
  sample_cmd->add_option("--fps", fps, "Frames per second")->capture_default_str();
  sample_cmd->add_option("--edge", edge, "clamp or loop")
      ->check(CLI::IsMember({"clamp", "loop"}))
      ->capture_default_str();

  std::string mode = "few_shot";
  std::string object_path;
  std::vector<std::string> demo_specs;
  std::string request;
  auto add_prompt_flags = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode, "few_shot or zero_shot")
        ->check(CLI::IsMember({"few_shot", "zero_shot"}))
        ->capture_default_str();
    cmd->add_option("--object", object_path, "Object JSON")->required();
    cmd->add_option("--demo", demo_specs, "Demonstration as <name>=<animation file>; repeatable");
    cmd->add_option("--request", request, "What the animation should show")->required();
    cmd->add_option("--templates", flags.template_dir, "Prompt template directory");
    cmd->add_option("--out", out_path, "Output file (default stdout)");
  };

  auto* prompt = app.add_subcommand("prompt", "Metaprompt tools");
  prompt->require_subcommand(1);
  auto* prompt_build = prompt->add_subcommand("build", "Print the metaprompt");
  add_prompt_flags(prompt_build);

  std::string mock_dir;
  auto* generate = app.add_subcommand("generate", "Ask the model for an animation; prints clip JSON");
  add_prompt_flags(generate);
  add_llm_flags(generate);
  generate->add_option("--mock", mock_dir, "Replay numbered responses from this directory instead of HTTP");

  auto* control = app.add_subcommand("control", "Animation controller tools");
  control->require_subcommand(1);
  std::string inputs_path;
  double horizon = 10.0;
  std::uint64_t seed = 0;
  auto* simulate_cmd = control->add_subcommand("simulate", "Run a controller; prints trace JSON");
  add_io(simulate_cmd, src, "Controller");
  simulate_cmd->add_option("--inputs", inputs_path, "JSON list of [time, key] pairs");
  simulate_cmd->add_option("--horizon", horizon, "Seconds to simulate")->capture_default_str();
  simulate_cmd->add_option("--seed", seed, "Random-trigger seed")->capture_default_str();

  std::vector<std::string> clip_names;
  auto* control_generate = control->add_subcommand("generate", "Ask the model for a controller");
  control_generate->add_option("--request", request, "Desired behaviour")->required();
  control_generate->add_option("--clip", clip_names, "Available clip name; repeatable")->required();
  control_generate->add_option("--templates", flags.template_dir, "Prompt template directory");
  control_generate->add_option("--out", out_path, "Output file (default stdout)");
  control_generate->add_option("--mock", mock_dir, "Replay numbered responses from this directory");
  add_llm_flags(control_generate);

  int port = kDefaultPort;
  std::string host = "127.0.0.1";
  std::string zero_shot_demo;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--store", flags.store_dir, "Store directory");
  serve->add_option("--templates", flags.template_dir, "Prompt template directory");
  serve->add_option("--zero-shot-demo", zero_shot_demo, "Default zero-shot demonstration as <name>=<file>");
  serve->add_option("--mock", mock_dir, "Replay numbered responses from this directory");
  add_llm_flags(serve);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("RIGMOTION_CONFIG")) config_path = env;
    }
    const ConfigLayer file = config_path.empty() ? ConfigLayer{} : config_from_file(config_path);
    const char* key = std::getenv("RIGMOTION_API_KEY");
    const CliConfig cfg = merge_config(flags, config_from_env([](const char* n) { return std::getenv(n); }), file,
                                       key ? key : "");

    if (*validate) {
      const Skeleton skeleton = parse_object_json(read_file(skeleton_path));
      const ValidationReport report = validate_against(load_clip(src.read(in)), skeleton);
      write_output(out_path, out, format_report(report));
      return report.ok() ? kExitOk : kExitUsage;
    }
    if (*fmt) {
      write_output(out_path, out, serialize_document(parse_animstring(src.read(in)), std::nullopt));
      return kExitOk;
    }
    if (*compress_cmd) {
      const Clip clip = load_clip(src.read(in));
      const Clip reduced = compress(clip, tolerance);
      const std::string before = serialize_animstring(clip, cfg.quantize);
      const std::string after = serialize_animstring(reduced, cfg.quantize);
      write_output(out_path, out, after);
      const std::size_t tb = estimate_tokens(before), ta = estimate_tokens(after);
      err << "keys: " << clip.key_count() << " -> " << reduced.key_count() << " ("
          << static_cast<long long>(reduced.key_count()) - static_cast<long long>(clip.key_count()) << ")\n"
          << "tokens: " << tb << " -> " << ta << " ("
          << static_cast<long long>(ta) - static_cast<long long>(tb) << ")\n";
      return kExitOk;
    }
    if (*sample_cmd) {
      const Skeleton skeleton = parse_object_json(read_file(skeleton_path));
      const Clip clip = load_clip(src.read(in));
      const auto frames = sample_series(clip, skeleton, fps, edge == "loop" ? EdgeMode::loop : EdgeMode::clamp);
      write_output(out_path, out, frames_to_csv(frames));
      return kExitOk;
    }
    if (*prompt_build || *generate) {
      const Skeleton skeleton = parse_object_json(read_file(object_path));
      const MetapromptSpec spec =
          make_metaprompt_spec(parse_prompt_mode(mode), skeleton, load_demos(demo_specs), request);
      const TemplateSet templates = load_templates(cfg.template_dir);
      if (*prompt_build) {
        write_output(out_path, out, build_metaprompt(spec, templates));
        return kExitOk;
      }
      auto transport = make_transport(mock_dir, cfg.llm);
      const GenerationResult result = generate_animation(spec, skeleton, cfg.llm, *transport, templates);
      for (const auto& note : result.repair_notes) err << note << "\n";
      err << "attempts: " << result.attempts << "\n";
      write_output(out_path, out, serialize_clip_json(result.clip) + "\n");
      return kExitOk;
    }
    if (*simulate_cmd) {
      const ControllerProgram program = parse_controller(src.read(in));
      const std::vector<KeyInput> inputs =
          inputs_path.empty() ? std::vector<KeyInput>{} : parse_inputs_json(read_file(inputs_path));
      write_output(out_path, out, trace_to_json(simulate(program, inputs, horizon, seed)));
      return kExitOk;
    }
    if (*control_generate) {
      auto transport = make_transport(mock_dir, cfg.llm);
      const ControllerProgram program =
          generate_controller(request, clip_names, cfg.llm, *transport, load_templates(cfg.template_dir));
      write_output(out_path, out, serialize_controller(program));
      return kExitOk;
    }
    if (*serve) {
      ServiceConfig sc;
      sc.store_dir = cfg.store_dir;
      sc.llm = cfg.llm;
      sc.templates = load_templates(cfg.template_dir);
      if (!zero_shot_demo.empty()) sc.zero_shot_demo = load_demos({zero_shot_demo}).front();
      std::shared_ptr<Transport> transport = make_transport(mock_dir, cfg.llm);
      Service service(std::move(sc), transport);
      err << "listening on " << host << ":" << port << ", store " << cfg.store_dir.string() << "\n";
      err.flush();
      if (!service.listen(host, port)) throw Error("IoError", "cannot listen on " + host + ":" + std::to_string(port));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    if (const auto* gen = dynamic_cast<const GenerationFailure*>(&e)) {
      for (const auto& note : gen->repair_notes()) err << "  " << note << "\n";
    }
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace rigmotion
