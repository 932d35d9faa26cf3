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

#include "teccobot/error.hpp"
#include "teccobot/language.hpp"

namespace teccobot {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::TooShort: return "too_short";
        case ErrorCode::InvalidEncoding: return "invalid_encoding";
        case ErrorCode::UnsupportedLanguage: return "unsupported_language";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::EmptyConcepts: return "empty_concepts";
        case ErrorCode::UnresolvedPlaceholder: return "unresolved_placeholder";
        case ErrorCode::ModeMismatch: return "mode_mismatch";
        case ErrorCode::InvalidTemplate: return "invalid_template";
        case ErrorCode::DuplicateNodeId: return "duplicate_node_id";
        case ErrorCode::UnknownRecipient: return "unknown_recipient";
        case ErrorCode::NotRecipient: return "not_recipient";
        case ErrorCode::SignatureInvalid: return "signature_invalid";
        case ErrorCode::DecryptionFailure: return "decryption_failure";
        case ErrorCode::Unreachable: return "unreachable";
        case ErrorCode::MalformedEnvelope: return "malformed_envelope";
        case ErrorCode::TokenInvalid: return "token_invalid";
        case ErrorCode::TokenExpired: return "token_expired";
        case ErrorCode::SessionClosed: return "session_closed";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Forbidden: return "forbidden";
        case ErrorCode::Busy: return "busy";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::IoError: return "io_error";
        case ErrorCode::ConfigError: return "config_error";
    }
    return "unknown";
}

std::string_view to_string(Language language) {
    return language == Language::EN ? "en" : "de";
}

Language parse_language(std::string_view text) {
    if (text == "en" || text == "EN") return Language::EN;
    if (text == "de" || text == "DE") return Language::DE;
    throw Error(ErrorCode::UnsupportedLanguage, "unsupported language: " + std::string(text));
}

}  // namespace teccobot
