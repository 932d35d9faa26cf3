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

// The mentoring service: sessions, submissions, the feedback pipeline and
// the relay nodes it runs on. The HTTP layer (http_api.hpp) is a thin
// adapter over BotService.
//
// Pipeline, per submission:
//   Received    raw text stored (encrypted)
//   Cleaned     clean text stored
//   GraphBuilt  student graph stored
//   Compared    request sealed to the feedback node through the relay;
//               report and document stored from the sealed reply
//   FeedbackReady document indexed; session gets PipelineDone
// Each status is journaled before the next stage starts. On start-up
// unfinished submissions resume from their last journaled status.

#pragma once

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "teccobot/dialog.hpp"
#include "teccobot/feedback_engine.hpp"
#include "teccobot/graph_builder.hpp"
#include "teccobot/hashing.hpp"
#include "teccobot/store.hpp"

namespace teccobot {

inline constexpr int kConfigVersion = 1;

struct AssignmentConfig {
    std::string assignment_id;
    std::string title;
    std::string prompt;
    Language language = Language::EN;
    FeedbackMode mode = FeedbackMode::Comparison;
    std::string template_id = "comparison";
    std::size_t min_words = kDefaultMinWords;
    std::filesystem::path reference_text;   // relative paths resolve against resource_dir
    std::filesystem::path reference_graph;  // alternative to reference_text
};

struct RelaySettings {
    std::string transport = "in_process";  // or "tcp"
    int max_attempts = 3;
    int backoff_ms = 50;
    int reply_timeout_ms = 30000;
};

struct ServiceConfig {
    std::filesystem::path data_dir;
    std::filesystem::path resource_dir = TECCOBOT_RESOURCE_DIR;
    std::string host = "127.0.0.1";
    std::uint16_t port = 8080;
    Bytes issuer_public_key;
    std::size_t queue_depth = 16;
    std::size_t workers = 2;
    std::size_t max_upload_bytes = 1u << 20;
    bool fsync = true;
    GraphParams graph;
    RelaySettings relay;
    std::string pdf_converter;  // shell command with {input} and {output}
    std::vector<AssignmentConfig> assignments;

    /// Throws Error(ConfigError) naming the offending field.
    static ServiceConfig from_json(const nlohmann::json& j);
    /// Reads the file, then applies TECCOBOT_DATA_DIR, TECCOBOT_RESOURCE_DIR,
    /// TECCOBOT_HOST and TECCOBOT_PORT.
    static ServiceConfig load(const std::filesystem::path& path);
    void apply_env_overrides();
    nlohmann::json to_json() const;
};

struct Assignment {
    std::string assignment_id;
    std::string title;
    std::string prompt_text;
    ConceptGraph reference_graph;
    FeedbackMode mode = FeedbackMode::Comparison;
    std::string template_id;
    Language language = Language::EN;
    std::size_t min_words = kDefaultMinWords;
};

/// Thrown by a test hook to stop processing as if the process died.
struct SimulatedCrash : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ServiceHooks {
    /// Called after each status is journaled.
    std::function<void(const std::string& submission_id, SubmissionStatus status)> after_stage;
};

struct EventResult {
    DialogSession session;
    std::vector<BotReply> replies;
    bool busy = false;
    std::string submission_id;
};

class BotService {
public:
    /// Loads keys and assignments, recovers unfinished work, starts the
    /// relay nodes and workers. Throws Error(ConfigError).
    explicit BotService(ServiceConfig config, ServiceHooks hooks = {});
    ~BotService();
    BotService(const BotService&) = delete;
    BotService& operator=(const BotService&) = delete;

    /// Stops workers and nodes; idempotent.
    void stop();

    const ServiceConfig& config() const noexcept { return config_; }
    const std::vector<Assignment>& assignments() const noexcept { return assignments_; }
    /// Throws Error(NotFound).
    const Assignment& assignment(const std::string& assignment_id) const;

    /// Empty assignment_id picks the first assignment. Throws Error(NotFound).
    DialogSession create_session(const std::string& subject, const std::string& assignment_id = {});
    /// Throws Error(NotFound), Error(Forbidden), Error(SessionClosed).
    EventResult post_message(const std::string& subject, const std::string& session_id, const std::string& text);
    /// Also throws Error(InvalidArgument) for an oversized or empty file.
    EventResult upload(const std::string& subject, const std::string& session_id, const std::string& file_name,
                       const std::string& content);
    DialogSession get_session(const std::string& subject, const std::string& session_id);
    /// Exported HTML (or PDF when `pdf` and a converter produced one).
    std::string get_document(const std::string& subject, const std::string& document_id, bool pdf = false);
    /// Removes the session, its raw texts, artifacts and documents.
    void delete_session(const std::string& subject, const std::string& session_id);

    std::optional<Submission> submission(const std::string& submission_id) const;
    /// Blocks until no submission is queued or processing.
    bool wait_until_idle(std::chrono::milliseconds timeout);
    /// In-process transport only: takes the feedback node off the network.
    void set_feedback_node_online(bool online);
    /// True once a SimulatedCrash stopped processing.
    bool crashed() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ServiceConfig config_;
    std::vector<Assignment> assignments_;
};

/// Builds an Assignment, including its reference graph, from configuration.
Assignment build_assignment(const AssignmentConfig& config, const std::filesystem::path& resource_dir,
                            const GraphParams& params);

}  // namespace teccobot
