/* Copyright 2026 The memaudit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// JSON-over-HTTP wire protocol for backends.
//
//   POST /v1/handshake    {}                          -> {model_label, embedding_dim, deterministic}
//   POST /v1/generate     {prompt, seed, width, height, steps, guidance}
//                                                     -> {image_id, image_b64}
//   POST /v1/embed/image  {image_b64}                 -> {embedding}
//   POST /v1/embed/text   {text}                      -> {embedding}
//   POST /v1/aesthetic    {image_b64}                 -> {score}
//
// 503 is retryable, 400 is a schema violation, 422 a rejected generation.

#ifndef MEMAUDIT_HTTP_BACKEND_HPP_
#define MEMAUDIT_HTTP_BACKEND_HPP_

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "memaudit/backend.hpp"

namespace httplib {
class Server;
}

namespace memaudit {

std::string base64_encode(std::string_view bytes);
// Throws BackendError(kDecode) on invalid input.
std::string base64_decode(std::string_view text);

struct HttpBackendOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string bearer_token;
  GenerationParams generation;
  std::chrono::seconds timeout{300};
};

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  ~HttpBackend() override;

  BackendDescriptor handshake() override;
  GeneratedImage generate(const std::string& prompt, std::uint64_t seed) override;
  EmbeddingVector embed_image(const GeneratedImage& image) override;
  EmbeddingVector embed_text(const std::string& text) override;
  double aesthetic_score(const GeneratedImage& image) override;

 private:
  std::string post(const std::string& path, const std::string& body);

  HttpBackendOptions options_;
};

// Serves any Backend over the wire protocol. Used to expose the mock to
// out-of-process tools and by the protocol conformance tests.
class BackendServer {
 public:
  explicit BackendServer(Backend& backend);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  // port 0 binds an ephemeral port. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  Backend& backend_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace memaudit

#endif  // MEMAUDIT_HTTP_BACKEND_HPP_
