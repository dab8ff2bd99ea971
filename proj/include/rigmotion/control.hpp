#pragma once

// Animation state machine driven by a small controller language (v1):
//
//   state idle plays "Idle" loop
//   state walk plays "Walking" loop
//   initial idle
//   on key(space) from idle goto walk fade 0.25
//   on timer(3) in walk goto idle fade 0.2
//   on random(0.1, 0.5) from ANY goto idle fade 0.3
//
// The language is closed: a program can only name states, clips, triggers and
// crossfade durations, so model-written controllers are safe to run.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rigmotion/llm_bridge.hpp"
#include "rigmotion/promptkit.hpp"

namespace rigmotion {

struct StateDecl {
  std::string name;
  std::string clip;
  bool loop = false;

  bool operator==(const StateDecl&) const = default;
};

struct Trigger {
  enum class Kind { key, timer, random };

  Kind kind = Kind::key;
  std::string key;           // key
  double seconds = 0.0;      // timer: delay after entering the source state
  double probability = 0.0;  // random: chance per check
  double interval = 0.0;     // random: seconds between checks

  bool operator==(const Trigger&) const = default;
};

struct Transition {
  std::optional<std::string> from;  // nullopt means ANY
  std::string to;
  Trigger trigger;
  double fade = 0.0;

  bool operator==(const Transition&) const = default;
};

struct ControllerProgram {
  std::vector<StateDecl> states;
  std::string initial_state;
  std::vector<Transition> transitions;

  const StateDecl* find_state(std::string_view name) const;
  bool operator==(const ControllerProgram&) const = default;
};

// Throws SyntaxError, or Error with code UnknownState, DuplicateState or
// NoInitialState.
ControllerProgram parse_controller(std::string_view text);

// Canonical text; parse_controller(serialize_controller(p)) == p.
std::string serialize_controller(const ControllerProgram& program);

struct KeyInput {
  double time = 0.0;
  std::string key;
};

struct TraceEvent {
  enum class Kind { entered, crossfade_started, input };

  double time = 0.0;
  Kind kind = Kind::entered;
  std::string state;  // entered
  std::string from;   // crossfade_started
  std::string to;     // crossfade_started
  double fade = 0.0;  // crossfade_started
  std::string key;    // input
};

struct SimTrace {
  std::vector<TraceEvent> events;
};

// SplitMix64. next_double() takes the top 53 bits of next().
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Discrete-event run over [0, horizon]. Events due at the same instant are
// handled inputs first, then timers, then random checks, each in declaration
// order. A transition switches state at the start of its crossfade. ANY
// transitions never target the state already active. Throws
// Error("InvalidArgument") for unsorted inputs or inputs past the horizon.
SimTrace simulate(const ControllerProgram& program, const std::vector<KeyInput>& inputs, double horizon,
                  std::uint64_t seed);

// Seconds spent in each state over [0, horizon].
std::map<std::string, double> occupancy(const SimTrace& trace, double horizon);

// {"events":[...]} with one event per line and numbers rounded to six decimals.
std::string trace_to_json(const SimTrace& trace);

// Accepts [[t, "key"], ...] or [{"time": t, "key": "..."}, ...]. Throws
// Error("MalformedJson").
std::vector<KeyInput> parse_inputs_json(std::string_view text);

// Asks the model for a controller using only `available_clips`, repairing
// syntax errors and unknown clips. Throws GenerationFailure with code
// NoValidController, or Error("InvalidArgument") for an empty clip list.
ControllerProgram generate_controller(const std::string& request, const std::vector<std::string>& available_clips,
                                      const LlmConfig& config, Transport& transport, const TemplateSet& templates);

}  // namespace rigmotion
