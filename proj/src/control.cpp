#include "rigmotion/control.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"

namespace rigmotion {
namespace {

struct Token {
  enum class Kind { word, string, open, close, comma } kind;
  std::string text;
  int column = 0;
};

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const int col = static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == '"') {
      const auto close = line.find('"', i + 1);
      if (close == std::string_view::npos) throw SyntaxError(line_no, col, "closing '\"'");
      tokens.push_back({Token::Kind::string, std::string(line.substr(i + 1, close - i - 1)), col});
      i = close + 1;
    } else if (c == '(' || c == ')' || c == ',') {
      tokens.push_back({c == '(' ? Token::Kind::open : c == ')' ? Token::Kind::close : Token::Kind::comma,
                        std::string(1, c), col});
      ++i;
    } else {
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
             std::string_view("()\",#").find(line[j]) == std::string_view::npos) {
        ++j;
      }
      tokens.push_back({Token::Kind::word, std::string(line.substr(i, j - i)), col});
      i = j;
    }
  }
  return tokens;
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, int line_no, int end_column)
      : tokens_(std::move(tokens)), line_(line_no), end_column_(end_column) {}

  bool done() const { return pos_ >= tokens_.size(); }

  const Token& expect(Token::Kind kind, const char* what) {
    if (done()) throw SyntaxError(line_, end_column_, what);
    const Token& t = tokens_[pos_];
    if (t.kind != kind) throw SyntaxError(line_, t.column, what, t.text);
    ++pos_;
    return t;
  }

  void keyword(const char* word) {
    const Token& t = expect(Token::Kind::word, word);
    if (t.text != word) throw SyntaxError(line_, t.column, std::string("'") + word + "'", t.text);
  }

  bool accept_keyword(const char* word) {
    if (!done() && tokens_[pos_].kind == Token::Kind::word && tokens_[pos_].text == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier(const char* what) {
    const Token& t = expect(Token::Kind::word, what);
    if (!valid_identifier(t.text)) throw SyntaxError(line_, t.column, what, t.text);
    return t.text;
  }

  double number(const char* what) {
    const Token& t = expect(Token::Kind::word, what);
    const auto v = parse_number(t.text);
    if (!v) throw SyntaxError(line_, t.column, what, t.text);
    last_column_ = t.column;
    return *v;
  }

  void require(bool ok, const char* what) {
    if (!ok) throw SyntaxError(line_, last_column_, what);
  }

  void finish() {
    if (!done()) throw SyntaxError(line_, tokens_[pos_].column, "end of line", tokens_[pos_].text);
  }

  int line() const { return line_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int line_;
  int end_column_;
  int last_column_ = 1;
};

Trigger parse_trigger(LineParser& p) {
  Trigger trigger;
  const std::string kind = p.identifier("key, timer or random");
  p.expect(Token::Kind::open, "'('");
  if (kind == "key") {
    trigger.kind = Trigger::Kind::key;
    trigger.key = p.expect(Token::Kind::word, "key name").text;
  } else if (kind == "timer") {
    trigger.kind = Trigger::Kind::timer;
    trigger.seconds = p.number("timer seconds");
    p.require(trigger.seconds > 0.0, "timer seconds > 0");
  } else if (kind == "random") {
    trigger.kind = Trigger::Kind::random;
    trigger.probability = p.number("probability");
    p.require(trigger.probability >= 0.0 && trigger.probability <= 1.0, "probability in [0, 1]");
    p.expect(Token::Kind::comma, "','");
    trigger.interval = p.number("check interval");
    p.require(trigger.interval > 0.0, "check interval > 0");
  } else {
    throw SyntaxError(p.line(), 4, "key, timer or random", kind);
  }
  p.expect(Token::Kind::close, "')'");
  return trigger;
}

void put_number(std::string& out, double v) { out += round_decimals(v, 6); }

void emit_event(std::string& out, const TraceEvent& e) {
  out += "{\"t\":";
  put_number(out, e.time);
  switch (e.kind) {
    case TraceEvent::Kind::entered:
      out += ",\"event\":\"entered\",\"state\":" + json_quote(e.state);
      break;
    case TraceEvent::Kind::crossfade_started:
      out += ",\"event\":\"crossfade_started\",\"from\":" + json_quote(e.from) + ",\"to\":" + json_quote(e.to) +
             ",\"fade\":";
      put_number(out, e.fade);
      break;
    case TraceEvent::Kind::input:
      out += ",\"event\":\"input\",\"key\":" + json_quote(e.key);
      break;
  }
  out += '}';
}

// Content of the first fenced block when there is one, else the whole reply.
std::string controller_candidate(std::string_view reply) {
  std::vector<std::string_view> lines;
  while (true) {
    const auto nl = reply.find('\n');
    lines.push_back(reply.substr(0, nl));
    if (nl == std::string_view::npos) break;
    reply.remove_prefix(nl + 1);
  }
  auto is_fence = [](std::string_view l) {
    while (!l.empty() && std::isspace(static_cast<unsigned char>(l.front()))) l.remove_prefix(1);
    return l.substr(0, 3) == "```";
  };
  std::size_t begin = 0;
  std::size_t end = lines.size();
  const auto open = std::find_if(lines.begin(), lines.end(), is_fence);
  if (open != lines.end()) {
    begin = static_cast<std::size_t>(open - lines.begin()) + 1;
    const auto close = std::find_if(lines.begin() + static_cast<std::ptrdiff_t>(begin), lines.end(), is_fence);
    end = static_cast<std::size_t>(close - lines.begin());
  }
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

// Safety valve for degenerate programs (e.g. microsecond check intervals over
// a long horizon).
constexpr std::size_t kMaxSimulationSteps = 20'000'000;

}  // namespace

const StateDecl* ControllerProgram::find_state(std::string_view name) const {
  for (const auto& s : states) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ControllerProgram parse_controller(std::string_view text) {
  ControllerProgram program;
  std::optional<int> initial_line;
  std::vector<int> transition_lines;
  int line_no = 0;
  while (true) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    auto tokens = tokenize(line, line_no);
    if (!tokens.empty()) {
      LineParser p(std::move(tokens), line_no, static_cast<int>(line.size()) + 1);
      const std::string head = p.identifier("state, initial or on");
      if (head == "state") {
        StateDecl decl;
        decl.name = p.identifier("state name");
        p.keyword("plays");
        decl.clip = p.expect(Token::Kind::string, "quoted clip name").text;
        decl.loop = p.accept_keyword("loop");
        p.finish();
        if (program.find_state(decl.name)) throw Error("DuplicateState", "state '" + decl.name + "' declared twice");
        program.states.push_back(std::move(decl));
      } else if (head == "initial") {
        if (initial_line) throw SyntaxError(line_no, 1, "a single initial declaration", "initial");
        program.initial_state = p.identifier("state name");
        p.finish();
        initial_line = line_no;
      } else if (head == "on") {
        Transition t;
        t.trigger = parse_trigger(p);
        if (!p.accept_keyword("from") && !p.accept_keyword("in")) {
          p.keyword("from");
        }
        const std::string source = p.identifier("state name or ANY");
        if (source != "ANY") t.from = source;
        p.keyword("goto");
        t.to = p.identifier("state name");
        p.keyword("fade");
        t.fade = p.number("fade seconds");
        p.require(t.fade >= 0.0, "fade seconds >= 0");
        p.finish();
        program.transitions.push_back(std::move(t));
        transition_lines.push_back(line_no);
      } else {
        throw SyntaxError(line_no, 1, "state, initial or on", head);
      }
    }
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }

  if (!initial_line) throw Error("NoInitialState", "no 'initial' declaration");
  if (!program.find_state(program.initial_state)) {
    throw Error("UnknownState", "line " + std::to_string(*initial_line) + ": initial state '" +
                                    program.initial_state + "' is not declared");
  }
  for (std::size_t i = 0; i < program.transitions.size(); ++i) {
    const Transition& t = program.transitions[i];
    for (const std::string* name : {t.from ? &*t.from : nullptr, &t.to}) {
      if (name && !program.find_state(*name)) {
        throw Error("UnknownState",
                    "line " + std::to_string(transition_lines[i]) + ": state '" + *name + "' is not declared");
      }
    }
  }
  return program;
}

std::string serialize_controller(const ControllerProgram& program) {
  std::string out;
  for (const auto& s : program.states) {
    out += "state " + s.name + " plays \"" + s.clip + "\"" + (s.loop ? " loop" : "") + "\n";
  }
  out += "initial " + program.initial_state + "\n";
  for (const auto& t : program.transitions) {
    out += "on ";
    switch (t.trigger.kind) {
      case Trigger::Kind::key: out += "key(" + t.trigger.key + ")"; break;
      case Trigger::Kind::timer: out += "timer(" + format_shortest(t.trigger.seconds) + ")"; break;
      case Trigger::Kind::random:
        out += "random(" + format_shortest(t.trigger.probability) + ", " + format_shortest(t.trigger.interval) + ")";
        break;
    }
    out += " from " + (t.from ? *t.from : std::string("ANY")) + " goto " + t.to + " fade " + format_shortest(t.fade) +
           "\n";
  }
  return out;
}

SimTrace simulate(const ControllerProgram& program, const std::vector<KeyInput>& inputs, double horizon,
                  std::uint64_t seed) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error("InvalidArgument", "horizon must be finite and >= 0");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(inputs[i].time) || inputs[i].time < 0.0 || inputs[i].time > horizon ||
        (i > 0 && inputs[i].time < inputs[i - 1].time)) {
      throw Error("InvalidArgument", "inputs must be sorted by time and lie within [0, horizon]");
    }
  }

  constexpr double kNever = std::numeric_limits<double>::infinity();
  SplitMix64 rng(seed);
  SimTrace trace;
  std::string current = program.initial_state;
  double entry = 0.0;

  // Per-transition schedule, reset whenever a state is entered.
  const std::size_t n = program.transitions.size();
  std::vector<bool> active(n);
  std::vector<bool> timer_spent(n);
  std::vector<std::uint64_t> checks_done(n);

  auto enter = [&](const std::string& state, double t) {
    current = state;
    entry = t;
    trace.events.push_back({t, TraceEvent::Kind::entered, state, {}, {}, 0.0, {}});
    for (std::size_t i = 0; i < n; ++i) {
      const Transition& tr = program.transitions[i];
      active[i] = tr.from ? *tr.from == current : tr.to != current;
      timer_spent[i] = false;
      checks_done[i] = 0;
    }
  };
  auto fire = [&](const Transition& tr, double t) {
    trace.events.push_back({t, TraceEvent::Kind::crossfade_started, {}, current, tr.to, tr.fade, {}});
    enter(tr.to, t);
  };

  enter(current, 0.0);
  std::size_t next_input = 0;
  for (std::size_t step = 0;; ++step) {
    if (step >= kMaxSimulationSteps) {
      throw Error("SimulationLimit", "simulation exceeded " + std::to_string(kMaxSimulationSteps) + " steps");
    }
    const double t_input = next_input < inputs.size() ? inputs[next_input].time : kNever;
    double t_timer = kNever;
    double t_random = kNever;
    std::size_t timer_index = n;
    std::size_t random_index = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const Trigger& trig = program.transitions[i].trigger;
      if (trig.kind == Trigger::Kind::timer && !timer_spent[i]) {
        const double at = entry + trig.seconds;
        if (at < t_timer) t_timer = at, timer_index = i;
      } else if (trig.kind == Trigger::Kind::random) {
        const double at = entry + static_cast<double>(checks_done[i] + 1) * trig.interval;
        if (at < t_random) t_random = at, random_index = i;
      }
    }
    const double t_next = std::min({t_input, t_timer, t_random});
    if (t_next > horizon) break;

    if (t_input == t_next) {
      const KeyInput& in = inputs[next_input++];
      trace.events.push_back({in.time, TraceEvent::Kind::input, {}, {}, {}, 0.0, in.key});
      for (std::size_t i = 0; i < n; ++i) {
        const Transition& tr = program.transitions[i];
        if (active[i] && tr.trigger.kind == Trigger::Kind::key && tr.trigger.key == in.key) {
          fire(tr, in.time);
          break;
        }
      }
    } else if (t_timer == t_next) {
      timer_spent[timer_index] = true;
      fire(program.transitions[timer_index], t_next);
    } else {
      ++checks_done[random_index];
      if (rng.next_double() < program.transitions[random_index].trigger.probability) {
        fire(program.transitions[random_index], t_next);
      }
    }
  }
  return trace;
}

std::map<std::string, double> occupancy(const SimTrace& trace, double horizon) {
  std::map<std::string, double> out;
  const TraceEvent* last = nullptr;
  for (const auto& e : trace.events) {
    if (e.kind != TraceEvent::Kind::entered) continue;
    if (last) out[last->state] += e.time - last->time;
    last = &e;
  }
  if (last) out[last->state] += horizon - last->time;
  return out;
}

std::string trace_to_json(const SimTrace& trace) {
  std::string out = "{\"events\":[";
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    out += i == 0 ? "\n  " : ",\n  ";
    emit_event(out, trace.events[i]);
  }
  out += "\n]}\n";
  return out;
}

std::vector<KeyInput> parse_inputs_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("MalformedJson", e.what());
  }
  if (!doc.is_array()) throw Error("MalformedJson", "inputs must be a JSON array");
  std::vector<KeyInput> inputs;
  for (const auto& item : doc) {
    if (item.is_array() && item.size() == 2 && item[0].is_number() && item[1].is_string()) {
      inputs.push_back({item[0].get<double>(), item[1].get<std::string>()});
    } else if (item.is_object() && item.contains("time") && item["time"].is_number() && item.contains("key") &&
               item["key"].is_string()) {
      inputs.push_back({item["time"].get<double>(), item["key"].get<std::string>()});
    } else {
      throw Error("MalformedJson", "each input must be [time, \"key\"] or {\"time\":..., \"key\":...}");
    }
  }
  return inputs;
}

ControllerProgram generate_controller(const std::string& request, const std::vector<std::string>& available_clips,
                                      const LlmConfig& config, Transport& transport, const TemplateSet& templates) {
  if (available_clips.empty()) throw Error("InvalidArgument", "at least one clip must be available");
  std::string clip_list;
  for (const auto& c : available_clips) clip_list += "- " + c + "\n";
  clip_list.pop_back();
  const std::string prompt =
      render_template(templates.control, {{"AVAILABLE_CLIPS", clip_list}, {"USER_REQUEST", request}});

  const std::set<std::string> allowed(available_clips.begin(), available_clips.end());
  std::optional<ControllerProgram> accepted;
  auto check = [&](const std::string& reply) -> std::vector<std::string> {
    try {
      ControllerProgram program = parse_controller(controller_candidate(reply));
      std::vector<std::string> errors;
      for (const auto& s : program.states) {
        if (!allowed.count(s.clip)) {
          errors.push_back("UnknownClip: state '" + s.name + "' plays \"" + s.clip + "\", which is not available");
        }
      }
      if (errors.empty()) accepted = std::move(program);
      return errors;
    } catch (const Error& e) {
      return {e.code() + ": " + e.what()};
    }
  };
  run_repair_loop(prompt, config, transport, templates.repair_controller, check, "NoValidController");
  return std::move(*accepted);
}

}  // namespace rigmotion
