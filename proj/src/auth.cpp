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

#include "teccobot/auth.hpp"

#include <sodium.h>

#include <json.hpp>

#include "teccobot/error.hpp"

namespace teccobot {

namespace {

std::string b64(std::string_view text) { return base64url_encode(to_bytes(text)); }

}  // namespace

IssuerKeys IssuerKeys::generate() {
    ensure_crypto_initialized();
    IssuerKeys keys{Bytes(crypto_sign_PUBLICKEYBYTES), Bytes(crypto_sign_SECRETKEYBYTES)};
    crypto_sign_keypair(keys.public_key.data(), keys.secret_key.data());
    return keys;
}

std::string issue_token(const IssuerKeys& issuer, const std::string& subject, SystemTime expiry) {
    ensure_crypto_initialized();
    nlohmann::json header = {{"alg", "EdDSA"}, {"typ", "JWT"}};
    nlohmann::json claims = {{"sub", subject}, {"exp", unix_seconds(expiry)}};
    std::string signing_input = b64(header.dump()) + "." + b64(claims.dump());
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, reinterpret_cast<const unsigned char*>(signing_input.data()),
                         signing_input.size(), issuer.secret_key.data());
    return signing_input + "." + base64url_encode(sig);
}

AccessToken verify_token(std::string_view raw, std::span<const std::uint8_t> issuer_public_key, SystemTime now) {
    ensure_crypto_initialized();
    auto invalid = [](const std::string& why) { return Error(ErrorCode::TokenInvalid, "invalid token: " + why); };
    if (issuer_public_key.size() != crypto_sign_PUBLICKEYBYTES) throw invalid("issuer key not configured");
    auto first = raw.find('.');
    auto second = first == std::string_view::npos ? first : raw.find('.', first + 1);
    if (second == std::string_view::npos || raw.find('.', second + 1) != std::string_view::npos) {
        throw invalid("expected three segments");
    }
    std::string_view signing_input = raw.substr(0, second);
    Bytes header_bytes, claims_bytes, sig;
    try {
        header_bytes = base64url_decode(raw.substr(0, first));
        claims_bytes = base64url_decode(raw.substr(first + 1, second - first - 1));
        sig = base64url_decode(raw.substr(second + 1));
    } catch (const Error&) {
        throw invalid("bad base64url");
    }
    if (sig.size() != crypto_sign_BYTES ||
        crypto_sign_verify_detached(sig.data(), reinterpret_cast<const unsigned char*>(signing_input.data()),
                                    signing_input.size(), issuer_public_key.data()) != 0) {
        throw invalid("signature does not verify");
    }
    nlohmann::json header, claims;
    try {
        header = nlohmann::json::parse(to_string(header_bytes));
        claims = nlohmann::json::parse(to_string(claims_bytes));
    } catch (const nlohmann::json::exception&) {
        throw invalid("segments are not JSON");
    }
    if (!header.is_object() || header.value("alg", "") != "EdDSA") throw invalid("unsupported alg");
    if (!claims.is_object() || !claims.contains("sub") || !claims["sub"].is_string() || !claims.contains("exp") ||
        !claims["exp"].is_number_integer()) {
        throw invalid("missing sub or exp");
    }
    AccessToken token{claims["sub"].get<std::string>(), claims["exp"].get<std::int64_t>()};
    if (token.subject.empty()) throw invalid("empty subject");
    if (unix_seconds(now) >= token.expires_at) throw Error(ErrorCode::TokenExpired, "token expired");
    return token;
}

}  // namespace teccobot
