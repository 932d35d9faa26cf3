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

#include <string>
#include <string_view>

namespace teccobot {

enum class Language { EN, DE };

/// "en" / "de" (lowercase ISO code).
std::string_view to_string(Language language);

/// Accepts "en", "EN", "de", "DE". Throws Error(UnsupportedLanguage).
Language parse_language(std::string_view text);

}  // namespace teccobot
