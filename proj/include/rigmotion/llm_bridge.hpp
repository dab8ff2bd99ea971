#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rigmotion/clip.hpp"
#include "rigmotion/promptkit.hpp"
#include "rigmotion/skeleton.hpp"

namespace rigmotion {

struct LlmConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_id = "gpt-4";
  std::string api_key;  // read from RIGMOTION_API_KEY, never from files on disk
  double temperature = 0.7;  // untuned
  int max_retries = 2;
  double timeout_seconds = 60.0;

  // Throws Error("ConfigError") when a field is out of range.
  void check() const;
};

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
};

// A chat-completion backend. Implementations must tolerate concurrent calls.
// Failures are reported as Error("TransportError") or Error("AuthError").
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

// Process-wide kill switch for HttpTransport. Tests turn it off to prove a
// code path never touches the network.
void set_network_enabled(bool enabled);
bool network_enabled();

// OpenAI-style chat completions over HTTP(S):
// POST {model, messages:[{role, content}], temperature}, reply read from
// choices[0].message.content.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(LlmConfig config);
  std::string complete(const ChatRequest& request) override;

 private:
  LlmConfig config_;
};

// Replays the numbered files of a directory (1.txt, 2.txt, ...) in numeric
// order, one per call, and records every request it receives.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& dir);
  explicit ReplayTransport(std::vector<std::string> responses);

  std::string complete(const ChatRequest& request) override;

  std::vector<ChatRequest> requests() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  std::vector<ChatRequest> requests_;
};

// Fails every call.
class OfflineTransport : public Transport {
 public:
  std::string complete(const ChatRequest& request) override;
};

// Drops markdown fences and returns the lines from the first one starting
// with ANIMATION through the next line reading END. Without an ANIMATION
// line the whole trimmed text is returned.
std::string extract_candidate(std::string_view response_text);

struct GenerationResult {
  Clip clip;
  std::string raw_response;
  int attempts = 0;
  std::vector<std::string> repair_notes;
};

// Sends the metaprompt, then keeps asking for corrections while the reply
// fails to parse or to validate against `skeleton`, up to
// config.max_retries extra turns. Throws GenerationFailure with code
// NoValidAnimation when attempts run out; transport errors propagate.
GenerationResult generate_animation(const MetapromptSpec& spec, const Skeleton& skeleton, const LlmConfig& config,
                                    Transport& transport, const TemplateSet& templates);

struct RepairLoopResult {
  std::string raw_response;
  int attempts = 0;
  std::vector<std::string> repair_notes;
};

// The shared conversation loop. `check` inspects a raw reply and returns the
// problems found; an empty list accepts the reply. `repair_template` is
// rendered with {ERRORS} for each correction turn.
RepairLoopResult run_repair_loop(const std::string& prompt, const LlmConfig& config, Transport& transport,
                                 const std::string& repair_template,
                                 const std::function<std::vector<std::string>(const std::string&)>& check,
                                 const std::string& failure_code);

}  // namespace rigmotion
