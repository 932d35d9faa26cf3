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

// Dialog state machine for one student session.
//
//   Greeting          + message          -> TaskOffered        (task prompt)
//   TaskOffered       + start keyword    -> AwaitingSubmission (upload help)
//   AwaitingSubmission+ upload           -> Processing         (ack, enqueue)
//   Processing        + pipeline done    -> FeedbackDelivered  (link, summary)
//   Processing        + pipeline failed  -> AwaitingSubmission (reason)
//   FeedbackDelivered + upload           -> Processing         (revision)
//   FeedbackDelivered + done keyword     -> Closed
//
// Anything else leaves the state unchanged and replies with help. Events
// after Closed raise SessionClosed. handle_event is pure: the caller
// supplies the timestamp and persists the outcome.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "teccobot/language.hpp"

namespace teccobot {

enum class DialogState { Greeting, TaskOffered, AwaitingSubmission, Processing, FeedbackDelivered, Closed };

/// "greeting", "task_offered", ...
std::string_view to_string(DialogState s);
/// Throws Error(ParseError).
DialogState parse_dialog_state(std::string_view text);

struct UserMessage {
    std::string text;
};
struct UserUpload {
    std::string file_name;
    std::string submission_id;
};
struct PipelineDone {
    std::string submission_id;
    std::string document_id;
    std::string summary;
};
struct PipelineFailed {
    std::string submission_id;
    std::string reason;
    std::string code;
};
using DialogEvent = std::variant<UserMessage, UserUpload, PipelineDone, PipelineFailed>;

struct BotReply {
    std::string kind;  // "text" or "feedback-link"
    std::string text;
    std::string document_id;

    bool operator==(const BotReply&) const = default;
};

struct HistoryEntry {
    std::string speaker;  // "student", "bot", "system"
    std::string kind;     // "text", "upload", "feedback-link", "event"
    std::string text;
    std::string document_id;
    std::string at;

    bool operator==(const HistoryEntry&) const = default;
};

struct DialogSession {
    std::string session_id;
    std::string student_id;
    std::string assignment_id;
    Language language = Language::EN;
    DialogState state = DialogState::Greeting;
    std::string current_submission;
    std::vector<HistoryEntry> history;

    bool operator==(const DialogSession&) const = default;
};

/// Keyword lists and reply wording for one language.
struct DialogScript {
    Language language = Language::EN;
    std::vector<std::string> start_keywords;
    std::vector<std::string> done_keywords;
    std::map<std::string, std::string> replies;
    std::map<std::string, std::string> failure_reasons;

    /// Reads <dir>/<lang>.json. Throws Error(NotFound) or Error(ConfigError).
    static DialogScript load(const std::filesystem::path& dir, Language language);

    /// Reply text with {name} fields filled. Throws Error(ConfigError) for
    /// an unknown key.
    std::string reply(const std::string& key, const std::map<std::string, std::string>& fields = {}) const;
    std::string failure_reason(const std::string& code, const std::map<std::string, std::string>& fields = {}) const;

    bool is_start(std::string_view text) const;
    bool is_done(std::string_view text) const;
};

struct DialogContext {
    const DialogScript& script;
    std::string title;
    std::string prompt_text;
};

struct DialogOutcome {
    DialogSession session;
    std::vector<BotReply> replies;
    std::vector<HistoryEntry> appended;  // the new history entries, in order
    bool enqueue_submission = false;
};

/// Throws Error(SessionClosed) once the session is closed.
DialogOutcome handle_event(const DialogSession& session, const DialogEvent& event, const DialogContext& ctx,
                           const std::string& at);

/// Records an upload that could not be queued: state unchanged, busy reply.
DialogOutcome reject_busy(const DialogSession& session, const UserUpload& upload, const DialogContext& ctx,
                          const std::string& at);

/// Replaces {name} fields; unknown fields stay as written.
std::string fill_fields(std::string_view text, const std::map<std::string, std::string>& fields);

}  // namespace teccobot
