/*
 * Copyright (c) 2026 The TecCoBot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "teccobot/http_api.hpp"

#include <httplib.h>

#include <thread>

#include "teccobot/auth.hpp"

namespace teccobot {

namespace {

constexpr const char* kJson = "application/json";

nlohmann::json replies_to_json(const std::vector<BotReply>& replies) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : replies) {
        nlohmann::json j = {{"kind", r.kind}, {"text", r.text}};
        if (!r.document_id.empty()) j["document_id"] = r.document_id;
        out.push_back(j);
    }
    return out;
}

nlohmann::json event_to_json(const EventResult& r) {
    nlohmann::json j = {{"session", session_to_json(r.session)}, {"replies", replies_to_json(r.replies)},
                        {"busy", r.busy}};
    if (!r.submission_id.empty()) j["submission_id"] = r.submission_id;
    return j;
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    send_json(res, http_status(code), {{"code", std::string(to_string(code))}, {"message", message}});
}

nlohmann::json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty() && allow_empty) return nlohmann::json::object();
    try {
        auto j = nlohmann::json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
        return j;
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ParseError, "request body is not valid JSON");
    }
}

std::string string_field(const nlohmann::json& j, const char* key, bool required) {
    if (!j.contains(key)) {
        if (required) throw Error(ErrorCode::InvalidArgument, std::string("missing field ") + key);
        return {};
    }
    if (!j[key].is_string()) throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a string");
    return j[key].get<std::string>();
}

bool is_text_media_type(const std::string& content_type) {
    return content_type.empty() || content_type.rfind("text/", 0) == 0;
}

}  // namespace

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::TokenInvalid:
        case ErrorCode::TokenExpired:
            return 401;
        case ErrorCode::Forbidden:
            return 403;
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::SessionClosed:
            return 409;
        case ErrorCode::Busy:
            return 503;
        case ErrorCode::ParseError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidEncoding:
        case ErrorCode::TooShort:
        case ErrorCode::UnsupportedLanguage:
            return 422;
        default:
            return 500;
    }
}

nlohmann::json session_to_json(const DialogSession& s) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& e : s.history) {
        nlohmann::json j = {{"speaker", e.speaker}, {"kind", e.kind}, {"text", e.text}, {"at", e.at}};
        if (!e.document_id.empty()) j["document_id"] = e.document_id;
        history.push_back(j);
    }
    return {{"session_id", s.session_id},
            {"assignment_id", s.assignment_id},
            {"language", std::string(to_string(s.language))},
            {"state", std::string(to_string(s.state))},
            {"history", history}};
}

struct HttpApi::Impl {
    BotService& service;
    httplib::Server server;
    std::thread thread;

    explicit Impl(BotService& s) : service(s) {}

    std::string authenticate(const httplib::Request& req) {
        std::string header = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) {
            throw Error(ErrorCode::TokenInvalid, "missing bearer token");
        }
        return verify_token(std::string_view(header).substr(prefix.size()), service.config().issuer_public_key)
            .subject;
    }

    using Handler = std::function<void(const std::string& subject, const httplib::Request&, httplib::Response&)>;

    httplib::Server::Handler authed(Handler handler) {
        return [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(authenticate(req), req, res);
            } catch (const Error& e) {
                send_error(res, e.code(), e.what());
            } catch (const std::exception& e) {
                send_error(res, ErrorCode::IoError, "internal error");
            }
        };
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                    {"Cache-Control", "no-store"}});
        server.set_payload_max_length(service.config().max_upload_bytes * 2 + 64 * 1024);

        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}});
        });

        server.Get("/assignments", authed([this](const std::string&, const httplib::Request&, httplib::Response& res) {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& a : service.assignments()) {
                out.push_back({{"assignment_id", a.assignment_id},
                               {"title", a.title},
                               {"language", std::string(to_string(a.language))},
                               {"mode", std::string(to_string(a.mode))},
                               {"min_words", a.min_words}});
            }
            send_json(res, 200, out);
        }));

        server.Post("/sessions", authed([this](const std::string& subject, const httplib::Request& req,
                                               httplib::Response& res) {
            auto body = parse_body(req, true);
            DialogSession s = service.create_session(subject, string_field(body, "assignment_id", false));
            send_json(res, 201, session_to_json(s));
        }));

        server.Post(R"(/sessions/([A-Za-z0-9_-]+)/messages)",
                    authed([this](const std::string& subject, const httplib::Request& req, httplib::Response& res) {
                        auto body = parse_body(req, false);
                        send_json(res, 200,
                                  event_to_json(service.post_message(subject, req.matches[1],
                                                                     string_field(body, "text", true))));
                    }));

        server.Post(R"(/sessions/([A-Za-z0-9_-]+)/upload)",
                    authed([this](const std::string& subject, const httplib::Request& req, httplib::Response& res) {
                        if (!req.has_file("file")) {
                            throw Error(ErrorCode::InvalidArgument, "expected a multipart field named file");
                        }
                        auto file = req.get_file_value("file");
                        if (!is_text_media_type(file.content_type)) {
                            throw Error(ErrorCode::InvalidArgument, "only plain text uploads are accepted");
                        }
                        send_json(res, 200,
                                  event_to_json(service.upload(subject, req.matches[1], file.filename, file.content)));
                    }));

        server.Get(R"(/sessions/([A-Za-z0-9_-]+))",
                   authed([this](const std::string& subject, const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, session_to_json(service.get_session(subject, req.matches[1])));
                   }));

        server.Delete(R"(/sessions/([A-Za-z0-9_-]+))",
                      authed([this](const std::string& subject, const httplib::Request& req, httplib::Response& res) {
                          service.delete_session(subject, req.matches[1]);
                          res.status = 204;
                      }));

        server.Get(R"(/documents/([A-Za-z0-9_-]+))",
                   authed([this](const std::string& subject, const httplib::Request& req, httplib::Response& res) {
                       std::string format = req.has_param("format") ? req.get_param_value("format") : "html";
                       if (format != "html" && format != "pdf") {
                           throw Error(ErrorCode::InvalidArgument, "format must be html or pdf");
                       }
                       bool pdf = format == "pdf";
                       res.status = 200;
                       res.set_content(service.get_document(subject, req.matches[1], pdf),
                                       pdf ? "application/pdf" : "text/html; charset=utf-8");
                   }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 404) {
                send_error(res, ErrorCode::NotFound, "no such route");
            } else if (res.status == 413) {
                nlohmann::json body = {{"code", std::string(to_string(ErrorCode::InvalidArgument))},
                                       {"message", "request body too large"}};
                res.set_content(body.dump(), kJson);
            }
        });
    }
};

HttpApi::HttpApi(BotService& service) : impl_(std::make_unique<Impl>(service)) { impl_->routes(); }

HttpApi::~HttpApi() { stop(); }

std::uint16_t HttpApi::start(const std::string& host, std::uint16_t port) {
    int bound = 0;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (impl_->server.bind_to_port(host, port)) {
        bound = port;
    }
    if (bound <= 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return static_cast<std::uint16_t>(bound);
}

void HttpApi::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpApi::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace teccobot
