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

#include "teccobot/language.hpp"

namespace teccobot {

// Suffix-stripping stemmers. Input must be a single lowercase UTF-8 word;
// output is lowercase UTF-8.

/// Porter's English stemmer (Snowball "porter" variant).
std::string stem_english(std::string_view word);

/// Snowball German stemmer, including umlaut folding in the postlude.
std::string stem_german(std::string_view word);

std::string stem(std::string_view word, Language language);

}  // namespace teccobot
