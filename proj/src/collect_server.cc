// src/collect_server.cc

// Copyright 2026  The fieldasr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "fieldasr/collect.h"
#include "fieldasr/version.h"

namespace fieldasr {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

void SendJson(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void SendError(httplib::Response& res, int status, const std::string& code,
               const std::string& message,
               std::optional<std::size_t> position = std::nullopt) {
  ordered_json e;
  e["code"] = code;
  e["message"] = message;
  if (position) e["position"] = *position;
  SendJson(res, status, ordered_json{{"error", e}});
}

std::size_t ParseCount(const httplib::Request& req, const char* key,
                       std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw CollectError(400, "bad_request",
                       std::string("invalid ") + key + " '" + v + "'");
  }
  return out;
}

nlohmann::json ParseBody(const httplib::Request& req) {
  try {
    nlohmann::json j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw CollectError(400, "bad_json", "expected an object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw CollectError(400, "bad_json", e.what());
  }
}

std::string StringField(const nlohmann::json& j, const char* key,
                        bool required = true) {
  if (!j.contains(key)) {
    if (!required) return "";
    throw CollectError(400, "bad_request",
                       std::string("missing field '") + key + "'");
  }
  if (!j.at(key).is_string()) {
    throw CollectError(400, "bad_request",
                       std::string("field '") + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

ordered_json SentenceJson(const Sentence& s, const CollectStore& store,
                          const std::string& scheme) {
  ordered_json j;
  j["id"] = s.id;
  j["text_phonemic"] = s.text_phonemic;
  j["rendered"] = store.Scheme(scheme).Apply(s.text_phonemic, store.orthography());
  ordered_json all = ordered_json::object();
  for (const std::string& name : store.SchemeNames()) {
    all[name] = store.Scheme(name).Apply(s.text_phonemic, store.orthography());
  }
  j["renderings"] = all;
  j["contributed_by"] =
      s.contributed_by.empty() ? ordered_json(nullptr) : ordered_json(s.contributed_by);
  j["active"] = s.active;
  return j;
}

ordered_json ContributorJson(const Contributor& c) {
  return ordered_json{{"id", c.id},
                      {"dialect", c.dialect},
                      {"preferred_scheme", c.preferred_scheme}};
}

ordered_json SubmissionJson(const Submission& s) {
  return ordered_json{{"id", s.id},
                      {"sentence_id", s.sentence_id},
                      {"contributor_id", s.contributor_id},
                      {"audio", s.audio},
                      {"received_at", s.received_at},
                      {"duration_s", s.duration_s}};
}

}  // namespace

struct CollectServer::Impl {
  CollectStore& store;
  CollectServerOptions options;
  httplib::Server server;

  Impl(CollectStore& s, CollectServerOptions o)
      : store(s), options(std::move(o)) {}

  template <typename Fn>
  httplib::Server::Handler Wrap(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const CollectError& e) {
        SendError(res, e.status(), e.code(), e.what(), e.position);
      } catch (const IoError& e) {
        SendError(res, 503, "storage_unavailable", e.what());
      } catch (const ValidationError& e) {
        SendError(res, 422, "validation", e.what());
      } catch (const std::exception& e) {
        SendError(res, 500, "internal", e.what());
      }
    };
  }

  void Routes();
};

void CollectServer::Impl::Routes() {
  server.set_pre_routing_handler(
      [this](const httplib::Request& req, httplib::Response& res) {
        if (options.token.empty() || req.path == "/api/health") {
          return httplib::Server::HandlerResponse::Unhandled;
        }
        if (req.get_header_value("X-Project-Token") != options.token) {
          SendError(res, 401, "unauthorized", "missing or wrong project token");
          return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
      });

  server.Get("/api/health", Wrap([this](const httplib::Request&,
                                        httplib::Response& res) {
    const CollectCounts c = store.Counts();
    ordered_json counts{{"sentences", c.sentences},
                        {"active_sentences", c.active_sentences},
                        {"contributors", c.contributors},
                        {"submissions", c.submissions}};
    if (!store.Writable()) {
      SendError(res, 503, "storage_unavailable",
                "storage directory '" + store.storage_dir().string() +
                    "' is not writable");
      return;
    }
    SendJson(res, 200,
             ordered_json{{"status", "ok"}, {"version", kVersion}, {"counts", counts}});
  }));

  server.Get("/api/schemes", Wrap([this](const httplib::Request&,
                                         httplib::Response& res) {
    ordered_json list = ordered_json::array();
    for (const std::string& name : store.SchemeNames()) {
      const TransliterationScheme& s = store.Scheme(name);
      ordered_json graphemes = ordered_json::array();
      for (const Grapheme& g : store.orthography().graphemes()) {
        graphemes.push_back({{"symbol", g.symbol},
                             {"class", GraphemeClassName(g.cls)},
                             {"rendering", s.Render(g)}});
      }
      list.push_back({{"name", name}, {"graphemes", graphemes}});
    }
    SendJson(res, 200, ordered_json{{"schemes", list}});
  }));

  server.Get("/api/sentences", Wrap([this](const httplib::Request& req,
                                           httplib::Response& res) {
    const std::string scheme =
        req.has_param("scheme") ? req.get_param_value("scheme") : "phonemic";
    store.Scheme(scheme);
    const std::size_t page = ParseCount(req, "page", 1);
    const std::size_t size = ParseCount(req, "page_size", 20);
    if (size > options.max_page_size) {
      throw CollectError(400, "bad_request", "page_size too large");
    }
    const bool inactive = req.has_param("include_inactive") &&
                          req.get_param_value("include_inactive") == "true";
    const SentencePage p = store.ListSentences(page, size, inactive);
    ordered_json items = ordered_json::array();
    for (const Sentence& s : p.sentences) items.push_back(SentenceJson(s, store, scheme));
    SendJson(res, 200,
             ordered_json{{"scheme", scheme},
                          {"page", p.page},
                          {"page_size", p.page_size},
                          {"total", p.total},
                          {"sentences", items}});
  }));

  server.Post("/api/sentences", Wrap([this](const httplib::Request& req,
                                            httplib::Response& res) {
    const nlohmann::json body = ParseBody(req);
    const std::string contributor = StringField(body, "contributor_id");
    const std::string text = StringField(body, "text_phonemic");
    if (contributor.empty()) {
      throw CollectError(400, "bad_request", "contributor_id is required");
    }
    const Sentence s = store.AddSentence(text, contributor, false);
    SendJson(res, 201, SentenceJson(s, store, "phonemic"));
  }));

  server.Post(R"(/api/sentences/([^/]+)/activate)",
              Wrap([this](const httplib::Request& req, httplib::Response& res) {
                if (options.reviewer_token.empty() ||
                    req.get_header_value("X-Reviewer-Token") !=
                        options.reviewer_token) {
                  throw CollectError(403, "forbidden", "reviewer token required");
                }
                const Sentence s = store.ActivateSentence(req.matches[1].str());
                SendJson(res, 200, SentenceJson(s, store, "phonemic"));
              }));

  server.Post("/api/validate", Wrap([this](const httplib::Request& req,
                                           httplib::Response& res) {
    const nlohmann::json body = ParseBody(req);
    const std::string text = StringField(body, "text");
    try {
      const std::string normalized = store.orthography().Normalize(text);
      SendJson(res, 200,
               ordered_json{{"valid", true},
                            {"normalized", normalized},
                            {"graphemes", store.orthography().Tokenize(normalized).size()}});
    } catch (const UnknownSymbolError& e) {
      SendJson(res, 200,
               ordered_json{{"valid", false},
                            {"error",
                             {{"code", "orthography"},
                              {"message", e.what()},
                              {"position", e.char_offset()},
                              {"byte_offset", e.byte_offset()}}}});
    }
  }));

  server.Post("/api/contributors", Wrap([this](const httplib::Request& req,
                                               httplib::Response& res) {
    const nlohmann::json body = ParseBody(req);
    Contributor c{StringField(body, "id"), StringField(body, "dialect", false),
                  StringField(body, "preferred_scheme", false)};
    if (c.preferred_scheme.empty()) c.preferred_scheme = "phonemic";
    const bool existed = store.FindContributor(c.id).has_value();
    SendJson(res, existed ? 200 : 201, ContributorJson(store.PutContributor(c)));
  }));

  server.Get(R"(/api/contributors/([^/]+))",
             Wrap([this](const httplib::Request& req, httplib::Response& res) {
               const auto c = store.FindContributor(req.matches[1].str());
               if (!c) {
                 throw CollectError(404, "unknown_contributor",
                                    "unknown contributor '" +
                                        req.matches[1].str() + "'");
               }
               SendJson(res, 200, ContributorJson(*c));
             }));

  server.Post("/api/recordings", Wrap([this](const httplib::Request& req,
                                             httplib::Response& res) {
    if (!req.is_multipart_form_data() || !req.has_file("audio")) {
      throw CollectError(400, "bad_request",
                         "expected multipart form data with an 'audio' part");
    }
    auto field = [&](const char* key) {
      return req.has_file(key) ? req.get_file_value(key).content : std::string();
    };
    const std::string audio = req.get_file_value("audio").content;
    std::string key = field("idempotency_key");
    if (key.empty()) key = req.get_header_value("Idempotency-Key");
    const auto [s, created] = store.SubmitRecording(
        field("sentence_id"), field("contributor_id"),
        std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(audio.data()),
                                 audio.size()),
        key);
    SendJson(res, created ? 201 : 200, SubmissionJson(s));
  }));

  server.Get("/api/export", Wrap([this](const httplib::Request&,
                                        httplib::Response& res) {
    res.status = 200;
    res.set_content(ExportManifest(store.ExportCorpus()),
                    "application/x-ndjson; charset=utf-8");
  }));

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    SendError(res, res.status, res.status == 404 ? "not_found" : "http_error",
              httplib::status_message(res.status));
  });
  server.set_payload_max_length(16 * 1024 * 1024);
}

CollectServer::CollectServer(CollectStore& store, CollectServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->Routes();
}

CollectServer::~CollectServer() { Stop(); }

int CollectServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void CollectServer::Run() { impl_->server.listen_after_bind(); }

void CollectServer::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace fieldasr
