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

// Bearer access tokens: compact JWS with alg EdDSA (Ed25519) and claims
// {"sub", "exp"}. The service only verifies; issuing exists for tests,
// the demo and operators.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "teccobot/clock.hpp"
#include "teccobot/hashing.hpp"

namespace teccobot {

struct IssuerKeys {
    Bytes public_key;  // 32 bytes
    Bytes secret_key;  // 64 bytes

    static IssuerKeys generate();
};

struct AccessToken {
    std::string subject;
    std::int64_t expires_at = 0;  // unix seconds
};

std::string issue_token(const IssuerKeys& issuer, const std::string& subject, SystemTime expiry);

/// Throws Error(TokenInvalid) for a malformed token or bad signature,
/// Error(TokenExpired) once now >= exp.
AccessToken verify_token(std::string_view raw, std::span<const std::uint8_t> issuer_public_key,
                         SystemTime now = std::chrono::system_clock::now());

}  // namespace teccobot
