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

#include <chrono>
#include <cstdint>
#include <string>

namespace teccobot {

using SystemTime = std::chrono::system_clock::time_point;

/// "2026-01-31T12:00:00Z", second precision.
std::string format_utc(SystemTime t);
std::string utc_now();
std::int64_t unix_seconds(SystemTime t);

}  // namespace teccobot
