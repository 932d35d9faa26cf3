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

// JSON-over-HTTP front of the bot service. Every route except /health
// needs "Authorization: Bearer <token>" issued by the configured issuer.
//
//   POST   /sessions                 {"assignment_id"?}      -> 201 session
//   POST   /sessions/{id}/messages   {"text"}                -> replies
//   POST   /sessions/{id}/upload     multipart field "file"  -> replies
//   GET    /sessions/{id}                                    -> session
//   DELETE /sessions/{id}                                    -> 204
//   GET    /documents/{id}[?format=pdf]                      -> document
//   GET    /assignments                                      -> list
//   GET    /health                                           -> {"status"}
//
// Errors are {"code", "message"} with the status from http_status().

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "teccobot/bot_service.hpp"
#include "teccobot/error.hpp"

namespace teccobot {

int http_status(ErrorCode code);

nlohmann::json session_to_json(const DialogSession& s);

class HttpApi {
public:
    explicit HttpApi(BotService& service);
    ~HttpApi();
    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    /// Returns the bound port. Throws Error(IoError).
    std::uint16_t start(const std::string& host, std::uint16_t port);
    /// Blocks until stop() is called from elsewhere.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace teccobot
