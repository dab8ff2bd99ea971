#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "rigmotion/llm_bridge.hpp"
#include "rigmotion/promptkit.hpp"
#include "rigmotion/store.hpp"

namespace httplib {
class Server;
}

namespace rigmotion {

inline constexpr int kDefaultPort = 7878;

struct ServiceConfig {
  std::filesystem::path store_dir;
  LlmConfig llm;
  TemplateSet templates;
  // Format demonstration used by zero-shot requests that bring none.
  std::optional<Demonstration> zero_shot_demo;
  std::string cors_origin = "*";
};

// HTTP+JSON API over a Store:
//
//   POST /skeletons                      object JSON -> {skeleton_id}
//   GET  /skeletons/{id}                 canonical object JSON
//   POST /sessions                       {skeleton_id[, session_id]} -> {session_id}
//   GET  /sessions/{id}                  session document
//   POST /sessions/{id}/generate         {request, mode, demonstrations?} -> {clip_id, attempts, repair_notes}
//   GET  /clips/{id}                     canonical clip JSON
//   GET  /clips/{id}/frames              ?skeleton=&fps=&edge= -> [{t, joints:[{name, position, rotation}]}]
//   POST /controllers                    controller text or {source} -> {controller_id}
//   GET  /controllers/{id}               {source}
//   POST /controllers/generate           {request, clips} -> {controller_id, source, attempts}
//   POST /controllers/{id}/simulate      {inputs, horizon, seed} -> trace JSON
//
// Errors are {code, message, details} with status 400 (invalid input), 404,
// 409 (id taken) or 502 (model failure).
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<Transport> transport);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void register_routes(httplib::Server& server);

  // Blocks serving on host:port until stop() is called.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with run() afterwards.
  int bind_any_port(const std::string& host);
  bool run();
  void stop();

  Store& store() { return store_; }

 private:
  std::mutex& session_mutex(const std::string& id);

  ServiceConfig config_;
  std::shared_ptr<Transport> transport_;
  Store store_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex sessions_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> session_locks_;
};

}  // namespace rigmotion
