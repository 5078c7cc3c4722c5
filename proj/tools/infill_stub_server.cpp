// Minimal fill-mask service speaking the remote-infiller wire format:
//   POST /fill  {"source": [...], "draft": [..., "<mask>", ...]}
//   200         {"tokens": ["...", ...]}  (one entry per mask, in order)
// Useful for exercising `synth-mlm --infiller remote:...` without a model.
// --misbehave switches select deliberately broken replies for testing the
// client's error paths.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

namespace {

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stub fill-mask server for the remote infiller"};
  int port = 0;
  std::string token = "stub";
  std::string misbehave = "none";
  int status = 200;
  app.add_option("--port", port, "Port to bind (0 = ephemeral)");
  app.add_option("--token", token, "Replacement emitted for every mask");
  app.add_option("--misbehave", misbehave, "Broken-reply mode")
      ->check(CLI::IsMember({"none", "residual-mask", "not-json", "missing-field"}));
  app.add_option("--status", status, "HTTP status for every reply");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  std::atomic<std::size_t> requests{0};
  server.Post("/fill", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    res.status = status;
    if (misbehave == "not-json") {
      res.set_content("this is not json", "text/plain");
      return;
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content("{\"error\":\"bad request body\"}", "application/json");
      return;
    }
    // Reply with the draft itself, masks replaced: same length, in order.
    nlohmann::json tokens = nlohmann::json::array();
    if (body.contains("draft")) {
      for (const auto& element : body["draft"]) {
        if (!element.is_string()) {
          res.status = 400;
          res.set_content("{\"error\":\"draft must hold strings\"}",
                          "application/json");
          return;
        }
        const std::string word = element.get<std::string>();
        if (word == "<mask>" && misbehave != "residual-mask") {
          tokens.push_back(token);
        } else {
          tokens.push_back(word);
        }
      }
    }
    nlohmann::json reply;
    if (misbehave == "missing-field") {
      reply["fillings"] = tokens;
    } else {
      reply["tokens"] = tokens;
    }
    res.set_content(reply.dump(), "application/json");
  });

  const int bound = port == 0 ? server.bind_to_any_port("127.0.0.1")
                              : (server.bind_to_port("127.0.0.1", port) ? port : -1);
  if (bound <= 0) {
    std::fprintf(stderr, "infill-stub: cannot bind 127.0.0.1:%d\n", port);
    return 1;
  }
  std::printf("listening on http://127.0.0.1:%d/fill\n", bound);
  std::fflush(stdout);
  server.listen_after_bind();
  std::fprintf(stderr, "infill-stub: served %zu request(s)\n", requests.load());
  return 0;
}
