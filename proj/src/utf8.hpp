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

// Internal UTF-8 helpers shared by the text modules.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace teccobot::detail {

/// Strict decode; std::nullopt on malformed input.
std::optional<std::u32string> decode_utf8(std::string_view text);

/// Lenient decode for input already known to be valid.
std::u32string to_u32(std::string_view text);

std::string to_utf8(std::u32string_view text);

std::size_t code_point_count(std::string_view text);

}  // namespace teccobot::detail
