#include "rigmotion/llm_bridge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rigmotion/animstring.hpp"
#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"

namespace rigmotion {
namespace {

std::atomic<bool> g_network_enabled{true};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with_word(std::string_view line, std::string_view word) {
  if (line.size() < word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(line[i])) != word[i]) return false;
  }
  return line.size() == word.size() || std::isspace(static_cast<unsigned char>(line[word.size()]));
}

std::optional<long> leading_number(const std::string& name) {
  std::size_t end = 0;
  while (end < name.size() && std::isdigit(static_cast<unsigned char>(name[end]))) ++end;
  if (end == 0) return std::nullopt;
  return std::stol(name.substr(0, end));
}

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += "- " + item + "\n";
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace

void LlmConfig::check() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error("ConfigError", "temperature must be in [0, 2], got " + format_shortest(temperature));
  }
  if (max_retries < 0) throw Error("ConfigError", "max_retries must be >= 0");
  if (!(timeout_seconds > 0.0)) throw Error("ConfigError", "timeout must be positive");
}

void set_network_enabled(bool enabled) { g_network_enabled = enabled; }
bool network_enabled() { return g_network_enabled; }

HttpTransport::HttpTransport(LlmConfig config) : config_(std::move(config)) { config_.check(); }

std::string HttpTransport::complete(const ChatRequest& request) {
  if (!network_enabled()) {
    throw Error("TransportError", "network access is disabled; refusing to contact " + config_.endpoint_url);
  }
  // Split "scheme://host[:port]/path" into the client base and the path.
  const auto scheme_end = config_.endpoint_url.find("://");
  if (scheme_end == std::string::npos) throw Error("ConfigError", "endpoint must be an http(s) URL");
  const auto path_start = config_.endpoint_url.find('/', scheme_end + 3);
  const std::string base = config_.endpoint_url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : config_.endpoint_url.substr(path_start);

  nlohmann::json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  httplib::Client client(base);
  const auto timeout = std::chrono::milliseconds(static_cast<long>(config_.timeout_seconds * 1000));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error("TransportError", "request to " + config_.endpoint_url + " failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) {
    throw Error("AuthError", "endpoint rejected the credentials (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error("TransportError", "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("TransportError", std::string("unexpected response shape: ") + e.what());
  }
}

ReplayTransport::ReplayTransport(const std::filesystem::path& dir) {
  std::vector<std::pair<long, std::filesystem::path>> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    if (const auto n = leading_number(entry.path().filename().string())) files.emplace_back(*n, entry.path());
  }
  if (ec) throw Error("IoError", "cannot list replay directory " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  for (const auto& [n, path] : files) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    responses_.push_back(ss.str());
  }
}

ReplayTransport::ReplayTransport(std::vector<std::string> responses) : responses_(std::move(responses)) {}

std::string ReplayTransport::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (next_ >= responses_.size()) {
    throw Error("TransportError", "replay exhausted after " + std::to_string(responses_.size()) + " response(s)");
  }
  return responses_[next_++];
}

std::vector<ChatRequest> ReplayTransport::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::size_t ReplayTransport::remaining() const {
  std::lock_guard lock(mutex_);
  return responses_.size() - next_;
}

std::string OfflineTransport::complete(const ChatRequest&) {
  throw Error("TransportError", "offline transport: no model endpoint is configured");
}

std::string extract_candidate(std::string_view response_text) {
  std::vector<std::string_view> lines;
  std::string_view rest = response_text;
  while (true) {
    const auto nl = rest.find('\n');
    const std::string_view line = rest.substr(0, nl);
    if (trim(line).substr(0, 3) != "```") lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }

  std::optional<std::size_t> begin;
  std::optional<std::size_t> end;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = trim(lines[i]);
    if (!begin) {
      if (starts_with_word(t, "ANIMATION")) begin = i;
    } else if (t.size() == 3 && starts_with_word(t, "END")) {
      end = i;
      break;
    }
  }
  std::string out;
  const std::size_t from = begin.value_or(0);
  const std::size_t to = end ? *end + 1 : lines.size();
  for (std::size_t i = from; i < to; ++i) {
    out += lines[i];
    out += '\n';
  }
  return std::string(trim(out));
}

RepairLoopResult run_repair_loop(const std::string& prompt, const LlmConfig& config, Transport& transport,
                                 const std::string& repair_template,
                                 const std::function<std::vector<std::string>(const std::string&)>& check,
                                 const std::string& failure_code) {
  config.check();
  ChatRequest request{config.model_id, {{"user", prompt}}, config.temperature};
  RepairLoopResult result;
  std::vector<std::string> last_errors;
  const int max_attempts = config.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    result.attempts = attempt;
    result.raw_response = transport.complete(request);
    last_errors = check(result.raw_response);
    if (last_errors.empty()) return result;
    if (attempt == max_attempts) break;
    result.repair_notes.push_back("attempt " + std::to_string(attempt) + " rejected: " + last_errors.front() +
                                  (last_errors.size() > 1 ? " (+" + std::to_string(last_errors.size() - 1) + " more)"
                                                          : std::string()));
    request.messages.push_back({"assistant", result.raw_response});
    request.messages.push_back({"user", render_template(repair_template, {{"ERRORS", bullet_list(last_errors)}})});
  }
  throw GenerationFailure(failure_code, result.attempts, last_errors, result.repair_notes);
}

GenerationResult generate_animation(const MetapromptSpec& spec, const Skeleton& skeleton, const LlmConfig& config,
                                    Transport& transport, const TemplateSet& templates) {
  const std::string prompt = build_metaprompt(spec, templates);
  std::optional<Clip> accepted;
  auto check = [&](const std::string& response) -> std::vector<std::string> {
    try {
      Clip clip = to_clip(parse_animstring(extract_candidate(response)));
      const ValidationReport report = validate_against(clip, skeleton);
      if (!report.ok()) return report.error_messages();
      accepted = std::move(clip);
      return {};
    } catch (const Error& e) {
      return {e.code() + ": " + e.what()};
    }
  };
  RepairLoopResult loop =
      run_repair_loop(prompt, config, transport, templates.repair_animation, check, "NoValidAnimation");
  return {std::move(*accepted), std::move(loop.raw_response), loop.attempts, std::move(loop.repair_notes)};
}

}  // namespace rigmotion
