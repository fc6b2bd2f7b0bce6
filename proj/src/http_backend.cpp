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

#include "memaudit/http_backend.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>

#include "memaudit/io.hpp"

namespace memaudit {
namespace {

using nlohmann::json;

json parse_body(const std::string& body) {
  try {
    auto doc = json::parse(body);
    if (!doc.is_object()) throw BackendError(BackendErrorKind::kSchema, "expected an object");
    return doc;
  } catch (const json::parse_error& e) {
    throw BackendError(BackendErrorKind::kSchema, e.what());
  }
}

EmbeddingVector embedding_from(const json& doc) {
  auto it = doc.find("embedding");
  if (it == doc.end() || !it->is_array() || it->empty()) {
    throw BackendError(BackendErrorKind::kSchema, "response lacks an embedding array");
  }
  std::vector<double> values;
  values.reserve(it->size());
  for (const auto& x : *it) {
    if (!x.is_number()) throw BackendError(BackendErrorKind::kSchema, "non-numeric component");
    values.push_back(x.get<double>());
  }
  try {
    return normalize(EmbeddingVector(std::move(values)));
  } catch (const std::exception& e) {
    throw BackendError(BackendErrorKind::kDecode, e.what());
  }
}

int status_for(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kUnavailable:
    case BackendErrorKind::kTimeout: return 503;
    case BackendErrorKind::kRejected: return 422;
    default: return 400;
  }
}

template <typename T>
T field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw BackendError(BackendErrorKind::kSchema, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw BackendError(BackendErrorKind::kSchema, std::string("bad type for '") + key + "'");
  }
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw BackendError(BackendErrorKind::kDecode, "bad base64 length");
  if (text.empty()) return {};
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw BackendError(BackendErrorKind::kDecode, "invalid base64");
  std::size_t pad = 0;
  if (text.ends_with("==")) {
    pad = 2;
  } else if (text.ends_with("=")) {
    pad = 1;
  }
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  httplib::Client cli(options_.base_url);
  cli.set_connection_timeout(std::chrono::seconds(10));
  cli.set_read_timeout(options_.timeout);
  cli.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);
  }
  auto res = cli.Post(path, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw BackendError(BackendErrorKind::kTimeout, path + ": " + httplib::to_string(err));
    }
    throw BackendError(BackendErrorKind::kUnavailable, path + ": " + httplib::to_string(err));
  }
  switch (res->status) {
    case 200: return res->body;
    case 422: throw BackendError(BackendErrorKind::kRejected, path + ": " + res->body);
    case 503: throw BackendError(BackendErrorKind::kUnavailable, path + ": " + res->body);
    case 504: throw BackendError(BackendErrorKind::kTimeout, path + ": " + res->body);
    default:
      if (res->status >= 500) {
        throw BackendError(BackendErrorKind::kUnavailable,
                           path + ": HTTP " + std::to_string(res->status));
      }
      throw BackendError(BackendErrorKind::kSchema,
                         path + ": HTTP " + std::to_string(res->status) + " " + res->body);
  }
}

BackendDescriptor HttpBackend::handshake() {
  const auto doc = parse_body(post("/v1/handshake", "{}"));
  BackendDescriptor d;
  d.kind = "http";
  d.endpoint = options_.base_url;
  d.model_label = field<std::string>(doc, "model_label");
  const auto dim = field<std::int64_t>(doc, "embedding_dim");
  if (dim <= 0) throw BackendError(BackendErrorKind::kSchema, "embedding_dim must be positive");
  d.embedding_dim = static_cast<std::size_t>(dim);
  d.deterministic = field<bool>(doc, "deterministic");
  return d;
}

GeneratedImage HttpBackend::generate(const std::string& prompt, std::uint64_t seed) {
  const auto& g = options_.generation;
  json req = {{"prompt", prompt}, {"seed", seed},     {"width", g.width},
              {"height", g.height}, {"steps", g.steps}, {"guidance", g.guidance}};
  const auto doc = parse_body(post("/v1/generate", req.dump()));
  GeneratedImage img;
  img.image_id = field<std::string>(doc, "image_id");
  img.bytes = base64_decode(field<std::string>(doc, "image_b64"));
  img.prompt_used = prompt;
  img.seed = seed;
  return img;
}

EmbeddingVector HttpBackend::embed_image(const GeneratedImage& image) {
  json req = {{"image_b64", base64_encode(image.bytes)}};
  return embedding_from(parse_body(post("/v1/embed/image", req.dump())));
}

EmbeddingVector HttpBackend::embed_text(const std::string& text) {
  if (text.empty()) throw BackendError(BackendErrorKind::kEmptyInput, "empty text");
  json req = {{"text", text}};
  return embedding_from(parse_body(post("/v1/embed/text", req.dump())));
}

double HttpBackend::aesthetic_score(const GeneratedImage& image) {
  json req = {{"image_b64", base64_encode(image.bytes)}};
  const auto doc = parse_body(post("/v1/aesthetic", req.dump()));
  const auto score = field<double>(doc, "score");
  if (!std::isfinite(score)) throw BackendError(BackendErrorKind::kDecode, "non-finite score");
  return score;
}

BackendServer::BackendServer(Backend& backend)
    : backend_(backend), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

BackendServer::~BackendServer() { stop(); }

void BackendServer::install_routes() {
  auto handle = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      json out;
      try {
        out = fn(parse_body(req.body.empty() ? "{}" : req.body));
        res.status = 200;
      } catch (const BackendError& e) {
        res.status = status_for(e.kind());
        out = {{"error", backend_error_label(e.kind())}, {"message", e.what()}};
      } catch (const std::exception& e) {
        res.status = 400;
        out = {{"error", "SchemaError"}, {"message", e.what()}};
      }
      res.set_content(out.dump(), "application/json");
    };
  };
  auto embedding_json = [](const EmbeddingVector& v) {
    json arr = json::array();
    for (double x : v.values()) arr.push_back(x);
    return arr;
  };
  auto image_from = [](const json& body) {
    GeneratedImage img;
    img.bytes = base64_decode(field<std::string>(body, "image_b64"));
    img.image_id = sha256_hex(img.bytes);
    return img;
  };

  server_->Post("/v1/handshake", handle([this](const json&) {
                  const auto d = backend_.handshake();
                  return json{{"model_label", d.model_label},
                              {"embedding_dim", d.embedding_dim},
                              {"deterministic", d.deterministic}};
                }));
  server_->Post("/v1/generate", handle([this](const json& body) {
                  const auto prompt = field<std::string>(body, "prompt");
                  const auto seed = field<std::uint64_t>(body, "seed");
                  for (const char* key : {"width", "height", "steps"}) {
                    if (body.contains(key)) field<std::int64_t>(body, key);
                  }
                  if (body.contains("guidance")) field<double>(body, "guidance");
                  if (prompt.empty()) {
                    throw BackendError(BackendErrorKind::kSchema, "prompt is empty");
                  }
                  const auto img = backend_.generate(prompt, seed);
                  return json{{"image_id", img.image_id}, {"image_b64", base64_encode(img.bytes)}};
                }));
  server_->Post("/v1/embed/image", handle([this, embedding_json, image_from](const json& body) {
                  return json{{"embedding", embedding_json(backend_.embed_image(image_from(body)))}};
                }));
  server_->Post("/v1/embed/text", handle([this, embedding_json](const json& body) {
                  const auto text = field<std::string>(body, "text");
                  if (text.empty()) throw BackendError(BackendErrorKind::kSchema, "text is empty");
                  return json{{"embedding", embedding_json(backend_.embed_text(text))}};
                }));
  server_->Post("/v1/aesthetic", handle([this, image_from](const json& body) {
                  return json{{"score", backend_.aesthetic_score(image_from(body))}};
                }));
}

int BackendServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw BackendError(BackendErrorKind::kUnavailable, "cannot bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void BackendServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw BackendError(BackendErrorKind::kUnavailable,
                       "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void BackendServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace memaudit
