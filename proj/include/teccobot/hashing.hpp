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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace teccobot {

using Bytes = std::vector<std::uint8_t>;

/// Initializes libsodium once per process; safe to call repeatedly.
void ensure_crypto_initialized();

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_hex(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> data);
/// Throws Error(ParseError) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

std::string base64url_encode(std::span<const std::uint8_t> data);
/// Throws Error(ParseError) on malformed input.
Bytes base64url_decode(std::string_view text);

Bytes to_bytes(std::string_view text);
std::string to_string(std::span<const std::uint8_t> bytes);

/// Cryptographically random bytes.
Bytes random_bytes(std::size_t count);
/// Random identifier of `bytes` random bytes, hex encoded.
std::string random_id(std::size_t bytes = 16);

}  // namespace teccobot
