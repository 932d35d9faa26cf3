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

#include "teccobot/hashing.hpp"

#include <sodium.h>

#include <mutex>

#include "teccobot/error.hpp"

namespace teccobot {

void ensure_crypto_initialized() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) {
            throw Error(ErrorCode::ConfigError, "libsodium initialization failed");
        }
    });
}

std::string sha256_hex(std::string_view data) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
    ensure_crypto_initialized();
    unsigned char digest[crypto_hash_sha256_BYTES];
    crypto_hash_sha256(digest, data.data(), data.size());
    return to_hex(digest);
}

std::string to_hex(std::span<const std::uint8_t> data) {
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.pop_back();
    return out;
}

Bytes from_hex(std::string_view hex) {
    ensure_crypto_initialized();
    if (hex.size() % 2 != 0) {
        throw Error(ErrorCode::ParseError, "hex string has odd length");
    }
    Bytes out(hex.size() / 2);
    size_t written = 0;
    const char* end = nullptr;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &written, &end) != 0 ||
        written != out.size() || end != hex.data() + hex.size()) {
        throw Error(ErrorCode::ParseError, "invalid hex string");
    }
    return out;
}

std::string base64url_encode(std::span<const std::uint8_t> data) {
    ensure_crypto_initialized();
    constexpr int variant = sodium_base64_VARIANT_URLSAFE_NO_PADDING;
    std::string out(sodium_base64_encoded_len(data.size(), variant), '\0');
    sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
    out.resize(out.size() - 1);
    return out;
}

Bytes base64url_decode(std::string_view text) {
    ensure_crypto_initialized();
    Bytes out(text.size() * 3 / 4 + 3);
    size_t written = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &written, &end,
                          sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0 ||
        end != text.data() + text.size()) {
        throw Error(ErrorCode::ParseError, "invalid base64url text");
    }
    out.resize(written);
    return out;
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

std::string to_string(std::span<const std::uint8_t> bytes) {
    return std::string(bytes.begin(), bytes.end());
}

Bytes random_bytes(std::size_t count) {
    ensure_crypto_initialized();
    Bytes out(count);
    randombytes_buf(out.data(), out.size());
    return out;
}

std::string random_id(std::size_t bytes) { return to_hex(random_bytes(bytes)); }

}  // namespace teccobot
