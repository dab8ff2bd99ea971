#include "rigmotion/service.hpp"

#include <chrono>
#include <ctime>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rigmotion/animstring.hpp"
#include "rigmotion/clip.hpp"
#include "rigmotion/control.hpp"
#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"
#include "rigmotion/kinematics.hpp"
#include "rigmotion/skeleton.hpp"

namespace rigmotion {

using nlohmann::json;

namespace {

// An HTTP-level failure: status plus the {code, message, details} body.
struct HttpError {
  int status;
  std::string code;
  std::string message;
  json details = json::object();
};

int status_for(const std::string& code) {
  static const std::set<std::string> upstream{"NoValidAnimation", "NoValidController", "TransportError", "AuthError"};
  static const std::set<std::string> internal{"IoError", "TemplateError", "ConfigError"};
  if (upstream.count(code)) return 502;
  if (internal.count(code)) return 500;
  return 400;
}

HttpError from_error(const Error& e) {
  HttpError out{status_for(e.code()), e.code(), e.what()};
  if (const auto* syntax = dynamic_cast<const SyntaxError*>(&e)) {
    out.details = {{"line", syntax->line()}, {"column", syntax->column()}, {"expected", syntax->expected()}};
  } else if (const auto* arity = dynamic_cast<const ArityError*>(&e)) {
    out.details = {{"section", arity->section()}, {"line", arity->line()}};
  } else if (const auto* gen = dynamic_cast<const GenerationFailure*>(&e)) {
    out.details = {{"attempts", gen->attempts()},
                   {"last_errors", gen->last_errors()},
                   {"repair_notes", gen->repair_notes()}};
  }
  return out;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
  send_json(res, e.status, {{"code", e.code}, {"message", e.message}, {"details", e.details}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError{400, "MalformedJson", e.what()};
  }
}

std::string require_string(const json& body, const char* field) {
  if (!body.is_object() || !body.contains(field) || !body[field].is_string()) {
    throw HttpError{400, "InvalidArgument", std::string("body needs a string \"") + field + "\""};
  }
  return body[field].get<std::string>();
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json frames_json(const std::vector<Frame>& frames) {
  json out = json::array();
  for (const auto& frame : frames) {
    json joints = json::array();
    for (const auto& [name, w] : frame.pose.entries) {
      joints.push_back({{"name", name},
                        {"position", {w.position.x, w.position.y, w.position.z}},
                        {"rotation", {w.rotation.x, w.rotation.y, w.rotation.z, w.rotation.w}}});
    }
    out.push_back({{"t", frame.time}, {"joints", std::move(joints)}});
  }
  return out;
}

std::vector<Demonstration> read_demonstrations(const json& body) {
  std::vector<Demonstration> demos;
  if (!body.contains("demonstrations")) return demos;
  const json& list = body["demonstrations"];
  if (!list.is_array()) throw HttpError{400, "InvalidArgument", "\"demonstrations\" must be an array"};
  for (const auto& d : list) {
    demos.push_back({require_string(d, "name"), require_string(d, "animation_string")});
  }
  return demos;
}

// Runs a handler, translating library and HTTP errors into error bodies.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const HttpError& e) {
      send_error(res, e);
    } catch (const Error& e) {
      send_error(res, from_error(e));
    } catch (const std::exception& e) {
      send_error(res, {500, "InternalError", e.what()});
    }
  };
}

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      store_(config_.store_dir),
      server_(std::make_unique<httplib::Server>()) {
  register_routes(*server_);
}

Service::~Service() = default;

std::mutex& Service::session_mutex(const std::string& id) {
  std::lock_guard lock(sessions_guard_);
  auto& slot = session_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void Service::register_routes(httplib::Server& server) {
  const std::string origin = config_.cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/skeletons", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Skeleton skeleton = parse_object_json(req.body);
                const std::string id = store_.put_content(DocKind::skeleton, serialize_object_json(skeleton));
                send_json(res, 200, {{"skeleton_id", id}});
              }));

  server.Get(R"(/skeletons/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto doc = store_.get(DocKind::skeleton, req.matches[1]);
               if (!doc) throw HttpError{404, "NotFound", "no skeleton " + std::string(req.matches[1])};
               res.set_content(*doc, "application/json");
             }));

  server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const std::string skeleton_id = require_string(body, "skeleton_id");
                if (!store_.contains(DocKind::skeleton, skeleton_id)) {
                  throw HttpError{404, "NotFound", "no skeleton " + skeleton_id};
                }
                std::string id = body.contains("session_id") ? require_string(body, "session_id") : Store::random_id();
                if (!Store::valid_id(id) || id.size() < 16) {
                  throw HttpError{400, "InvalidArgument", "session ids are 16-128 characters from [A-Za-z0-9_-]"};
                }
                const json session{{"id", id},
                                   {"skeleton_id", skeleton_id},
                                   {"created_at", now_iso8601()},
                                   {"history", json::array()}};
                if (!store_.create(DocKind::session, id, session.dump())) {
                  throw HttpError{409, "DuplicateId", "session " + id + " already exists"};
                }
                send_json(res, 200, {{"session_id", id}});
              }));

  server.Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto doc = store_.get(DocKind::session, req.matches[1]);
               if (!doc) throw HttpError{404, "NotFound", "no session " + std::string(req.matches[1])};
               res.set_content(*doc, "application/json");
             }));

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/generate)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string session_id = req.matches[1];
                const json body = parse_body(req);
                const std::string request = require_string(body, "request");
                const PromptMode mode =
                    parse_prompt_mode(body.contains("mode") ? require_string(body, "mode") : "few_shot");
                std::vector<Demonstration> demos = read_demonstrations(body);
                if (mode == PromptMode::zero_shot && demos.empty() && config_.zero_shot_demo) {
                  demos.push_back(*config_.zero_shot_demo);
                }

                std::lock_guard lock(session_mutex(session_id));
                const auto session_doc = store_.get(DocKind::session, session_id);
                if (!session_doc) throw HttpError{404, "NotFound", "no session " + session_id};
                json session = json::parse(*session_doc);
                const std::string skeleton_id = session["skeleton_id"].get<std::string>();
                const auto skeleton_doc = store_.get(DocKind::skeleton, skeleton_id);
                if (!skeleton_doc) throw HttpError{404, "NotFound", "no skeleton " + skeleton_id};
                const Skeleton skeleton = parse_object_json(*skeleton_doc);

                const MetapromptSpec spec = make_metaprompt_spec(mode, skeleton, std::move(demos), request);
                const GenerationResult result =
                    generate_animation(spec, skeleton, config_.llm, *transport_, config_.templates);
                const std::string clip_id = store_.put_content(DocKind::clip, serialize_clip_json(result.clip));
                session["history"].push_back({{"request", request},
                                              {"clip_id", clip_id},
                                              {"attempts", result.attempts},
                                              {"created_at", now_iso8601()}});
                store_.put(DocKind::session, session_id, session.dump());
                send_json(res, 200,
                          {{"clip_id", clip_id}, {"attempts", result.attempts}, {"repair_notes", result.repair_notes}});
              }));

  server.Get(R"(/clips/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto doc = store_.get(DocKind::clip, req.matches[1]);
               if (!doc) throw HttpError{404, "NotFound", "no clip " + std::string(req.matches[1])};
               res.set_content(*doc, "application/json");
             }));

  server.Get(R"(/clips/([A-Za-z0-9_-]+)/frames)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto clip_doc = store_.get(DocKind::clip, req.matches[1]);
               if (!clip_doc) throw HttpError{404, "NotFound", "no clip " + std::string(req.matches[1])};
               const std::string skeleton_id = req.get_param_value("skeleton");
               const auto skeleton_doc = store_.get(DocKind::skeleton, skeleton_id);
               if (!skeleton_doc) throw HttpError{404, "NotFound", "no skeleton '" + skeleton_id + "'"};
               double fps = 30.0;
               if (req.has_param("fps")) {
                 const auto v = parse_number(req.get_param_value("fps"));
                 if (!v) throw HttpError{400, "InvalidArgument", "fps must be a number"};
                 fps = *v;
               }
               EdgeMode edge = EdgeMode::clamp;
               if (req.has_param("edge")) {
                 const std::string e = req.get_param_value("edge");
                 if (e == "loop") {
                   edge = EdgeMode::loop;
                 } else if (e != "clamp") {
                   throw HttpError{400, "InvalidArgument", "edge must be clamp or loop"};
                 }
               }
               const Clip clip = parse_clip_json(*clip_doc);
               const Skeleton skeleton = parse_object_json(*skeleton_doc);
               send_json(res, 200, frames_json(sample_series(clip, skeleton, fps, edge)));
             }));

  auto store_controller = [this](const ControllerProgram& program) {
    return store_.put_content(DocKind::controller, json{{"source", serialize_controller(program)}}.dump());
  };

  server.Post("/controllers", guarded([this, store_controller](const httplib::Request& req, httplib::Response& res) {
                std::string source = req.body;
                if (req.get_header_value("Content-Type").find("json") != std::string::npos) {
                  source = require_string(parse_body(req), "source");
                }
                const ControllerProgram program = parse_controller(source);
                send_json(res, 200, {{"controller_id", store_controller(program)}});
              }));

  server.Post("/controllers/generate",
              guarded([this, store_controller](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const std::string request = require_string(body, "request");
                if (!body.contains("clips") || !body["clips"].is_array()) {
                  throw HttpError{400, "InvalidArgument", "body needs a \"clips\" array"};
                }
                std::vector<std::string> clips;
                for (const auto& c : body["clips"]) {
                  if (!c.is_string()) throw HttpError{400, "InvalidArgument", "clip names must be strings"};
                  clips.push_back(c.get<std::string>());
                }
                const ControllerProgram program =
                    generate_controller(request, clips, config_.llm, *transport_, config_.templates);
                send_json(res, 200,
                          {{"controller_id", store_controller(program)}, {"source", serialize_controller(program)}});
              }));

  server.Get(R"(/controllers/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto doc = store_.get(DocKind::controller, req.matches[1]);
               if (!doc) throw HttpError{404, "NotFound", "no controller " + std::string(req.matches[1])};
               res.set_content(*doc, "application/json");
             }));

  server.Post(R"(/controllers/([A-Za-z0-9_-]+)/simulate)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto doc = store_.get(DocKind::controller, req.matches[1]);
                if (!doc) throw HttpError{404, "NotFound", "no controller " + std::string(req.matches[1])};
                const ControllerProgram program = parse_controller(json::parse(*doc)["source"].get<std::string>());
                const json body = parse_body(req);
                std::vector<KeyInput> inputs;
                if (body.contains("inputs")) inputs = parse_inputs_json(body["inputs"].dump());
                if (!body.contains("horizon") || !body["horizon"].is_number()) {
                  throw HttpError{400, "InvalidArgument", "body needs a numeric \"horizon\""};
                }
                std::uint64_t seed = 0;
                if (body.contains("seed")) {
                  if (!body["seed"].is_number_integer()) throw HttpError{400, "InvalidArgument", "seed must be an integer"};
                  seed = body["seed"].get<std::uint64_t>();
                }
                const SimTrace trace = simulate(program, inputs, body["horizon"].get<double>(), seed);
                res.status = 200;
                res.set_content(trace_to_json(trace), "application/json");
              }));
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool Service::run() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

}  // namespace rigmotion
