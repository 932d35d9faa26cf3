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

// JSON mapping of the domain types. nlohmann::json keeps object keys in a
// std::map, so every dump has sorted keys.

#pragma once

#include <json.hpp>

#include <string>

#include "teccobot/graph_builder.hpp"
#include "teccobot/graph_compare.hpp"

namespace teccobot::detail {

/// Two-space indent, UTF-8 passthrough, trailing newline.
std::string canonical_dump(const nlohmann::json& j);

nlohmann::json graph_to_json(const ConceptGraph& graph);
/// Throws Error(ParseError); validates graph invariants.
ConceptGraph graph_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const ComparisonReport& report);
ComparisonReport report_from_json(const nlohmann::json& j);

nlohmann::json ratio_to_json(const Ratio& r);
Ratio ratio_from_json(const nlohmann::json& j);

/// Typed field access with ParseError on mismatch.
const nlohmann::json& require(const nlohmann::json& j, const char* key);
std::string require_string(const nlohmann::json& j, const char* key);
std::uint64_t require_uint(const nlohmann::json& j, const char* key);
std::vector<std::string> require_string_list(const nlohmann::json& j, const char* key);

}  // namespace teccobot::detail
