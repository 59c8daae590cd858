// Standalone mock chat-completions endpoint with deterministic canned
// responses, for exercising the generate pipeline without network access.

#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "valueprobe/testing/mock_chat_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"valueprobe-mock-server: OpenAI-compatible endpoint with canned responses"};
  int port = 8089;
  std::string require_key;
  app.add_option("--port", port, "port to listen on (127.0.0.1)");
  app.add_option("--require-key", require_key, "reject requests without this bearer token");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (!require_key.empty() &&
        req.get_header_value("Authorization") != "Bearer " + require_key) {
      res.status = 401;
      res.set_content("{\"error\":\"invalid api key\"}", "application/json");
      return;
    }
    std::string prompt;
    try {
      const nlohmann::json body = nlohmann::json::parse(req.body);
      prompt = body.at("messages").at(0).at("content").get<std::string>();
    } catch (...) {
      res.status = 400;
      res.set_content("{\"error\":\"bad request\"}", "application/json");
      return;
    }
    const std::string content = valueprobe::testing::canned_completion(prompt);
    const nlohmann::json reply{
        {"id", "chatcmpl-mock"},
        {"object", "chat.completion"},
        {"model", "mock"},
        {"choices",
         nlohmann::json::array({{{"index", 0},
                                 {"message", {{"role", "assistant"}, {"content", content}}},
                                 {"finish_reason", "stop"}}})}};
    res.status = 200;
    res.set_content(reply.dump(), "application/json");
  });

  std::cout << "listening on http://127.0.0.1:" << port << std::endl;
  if (!server.listen("127.0.0.1", port)) {
    std::cerr << "failed to bind port " << port << "\n";
    return 1;
  }
  return 0;
}
