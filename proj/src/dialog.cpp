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

#include "teccobot/dialog.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "teccobot/error.hpp"
#include "teccobot/text_pipeline.hpp"

namespace teccobot {

namespace {

constexpr std::array<std::pair<DialogState, std::string_view>, 6> kStateNames = {{
    {DialogState::Greeting, "greeting"},
    {DialogState::TaskOffered, "task_offered"},
    {DialogState::AwaitingSubmission, "awaiting_submission"},
    {DialogState::Processing, "processing"},
    {DialogState::FeedbackDelivered, "feedback_delivered"},
    {DialogState::Closed, "closed"},
}};

std::string normalize_input(std::string_view text, Language lang) {
    std::string lower = lowercase(text, lang);
    auto first = lower.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    auto last = lower.find_last_not_of(" \t\r\n");
    return lower.substr(first, last - first + 1);
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw Error(ErrorCode::ConfigError, std::string("dialog script lacks list ") + key);
    }
    std::vector<std::string> out;
    for (const auto& item : j[key]) out.push_back(item.get<std::string>());
    return out;
}

std::map<std::string, std::string> string_map(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_object()) {
        throw Error(ErrorCode::ConfigError, std::string("dialog script lacks object ") + key);
    }
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : j[key].items()) out[k] = v.get<std::string>();
    return out;
}

class Step {
public:
    Step(const DialogSession& session, const DialogContext& ctx, std::string at)
        : ctx_(ctx), at_(std::move(at)) {
        out_.session = session;
    }

    void record(std::string speaker, std::string kind, std::string text, std::string document_id = {}) {
        HistoryEntry e{std::move(speaker), std::move(kind), std::move(text), std::move(document_id), at_};
        out_.session.history.push_back(e);
        out_.appended.push_back(std::move(e));
    }

    void reply(const std::string& key, const std::map<std::string, std::string>& fields = {}) {
        reply_text(ctx_.script.reply(key, fields));
    }

    void reply_text(std::string text) {
        out_.replies.push_back({"text", text, {}});
        record("bot", "text", std::move(text));
    }

    void reply_link(std::string text, const std::string& document_id) {
        out_.replies.push_back({"feedback-link", text, document_id});
        record("bot", "feedback-link", std::move(text), document_id);
    }

    void help() { reply("help_" + std::string(to_string(out_.session.state))); }

    DialogOutcome& outcome() { return out_; }

private:
    const DialogContext& ctx_;
    std::string at_;
    DialogOutcome out_;
};

}  // namespace

std::string_view to_string(DialogState s) {
    for (const auto& [state, name] : kStateNames) {
        if (state == s) return name;
    }
    return "greeting";
}

DialogState parse_dialog_state(std::string_view text) {
    for (const auto& [state, name] : kStateNames) {
        if (name == text) return state;
    }
    throw Error(ErrorCode::ParseError, "unknown dialog state: " + std::string(text));
}

std::string fill_fields(std::string_view text, const std::map<std::string, std::string>& fields) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto open = text.find('{', pos);
        if (open == std::string_view::npos) break;
        auto close = text.find('}', open + 1);
        if (close == std::string_view::npos) break;
        out.append(text.substr(pos, open - pos));
        auto it = fields.find(std::string(text.substr(open + 1, close - open - 1)));
        if (it != fields.end()) {
            out += it->second;
        } else {
            out.append(text.substr(open, close - open + 1));
        }
        pos = close + 1;
    }
    out.append(text.substr(std::min(pos, text.size())));
    return out;
}

DialogScript DialogScript::load(const std::filesystem::path& dir, Language language) {
    auto path = dir / (std::string(to_string(language)) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "dialog script not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    try {
        if (j.value("version", 0) != 1) throw Error(ErrorCode::ConfigError, path.string() + ": unsupported version");
        DialogScript s;
        s.language = language;
        const auto& kw = j.at("keywords");
        for (auto& word : string_list(kw, "start")) s.start_keywords.push_back(normalize_input(word, language));
        for (auto& word : string_list(kw, "done")) s.done_keywords.push_back(normalize_input(word, language));
        s.replies = string_map(j, "replies");
        s.failure_reasons = string_map(j, "failure_reasons");
        for (const char* key : {"task_offer", "upload_instructions", "upload_ack", "feedback_ready", "pipeline_failed",
                                "closed", "busy", "summary"}) {
            if (!s.replies.count(key)) throw Error(ErrorCode::ConfigError, path.string() + ": missing reply " + key);
        }
        for (const auto& [state, name] : kStateNames) {
            if (state == DialogState::Closed) continue;
            if (!s.replies.count("help_" + std::string(name))) {
                throw Error(ErrorCode::ConfigError, path.string() + ": missing reply help_" + std::string(name));
            }
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
}

std::string DialogScript::reply(const std::string& key, const std::map<std::string, std::string>& fields) const {
    auto it = replies.find(key);
    if (it == replies.end()) throw Error(ErrorCode::ConfigError, "no dialog reply named " + key);
    return fill_fields(it->second, fields);
}

std::string DialogScript::failure_reason(const std::string& code,
                                         const std::map<std::string, std::string>& fields) const {
    auto it = failure_reasons.find(code);
    if (it == failure_reasons.end()) it = failure_reasons.find("internal");
    if (it == failure_reasons.end()) return code;
    return fill_fields(it->second, fields);
}

bool DialogScript::is_start(std::string_view text) const {
    auto t = normalize_input(text, language);
    return std::find(start_keywords.begin(), start_keywords.end(), t) != start_keywords.end();
}

bool DialogScript::is_done(std::string_view text) const {
    auto t = normalize_input(text, language);
    return std::find(done_keywords.begin(), done_keywords.end(), t) != done_keywords.end();
}

DialogOutcome handle_event(const DialogSession& session, const DialogEvent& event, const DialogContext& ctx,
                           const std::string& at) {
    if (session.state == DialogState::Closed) {
        throw Error(ErrorCode::SessionClosed, "session " + session.session_id + " is closed");
    }
    Step step(session, ctx, at);
    DialogSession& s = step.outcome().session;

    if (const auto* msg = std::get_if<UserMessage>(&event)) {
        step.record("student", "text", msg->text);
        if (s.state == DialogState::Greeting) {
            s.state = DialogState::TaskOffered;
            step.reply("task_offer", {{"title", ctx.title}, {"prompt", ctx.prompt_text}});
        } else if (s.state == DialogState::TaskOffered && ctx.script.is_start(msg->text)) {
            s.state = DialogState::AwaitingSubmission;
            step.reply("upload_instructions");
        } else if (s.state == DialogState::FeedbackDelivered && ctx.script.is_done(msg->text)) {
            s.state = DialogState::Closed;
            step.reply("closed");
        } else {
            step.help();
        }
    } else if (const auto* up = std::get_if<UserUpload>(&event)) {
        step.record("student", "upload", up->file_name);
        if (s.state == DialogState::AwaitingSubmission || s.state == DialogState::FeedbackDelivered) {
            s.state = DialogState::Processing;
            s.current_submission = up->submission_id;
            step.outcome().enqueue_submission = true;
            step.reply("upload_ack", {{"file", up->file_name}});
        } else {
            step.help();
        }
    } else if (const auto* done = std::get_if<PipelineDone>(&event)) {
        step.record("system", "event", "pipeline_done " + done->submission_id, done->document_id);
        if (s.state == DialogState::Processing && done->submission_id == s.current_submission) {
            s.state = DialogState::FeedbackDelivered;
            step.reply_link(ctx.script.reply("feedback_ready", {{"summary", done->summary}}), done->document_id);
        } else {
            step.help();
        }
    } else if (const auto* failed = std::get_if<PipelineFailed>(&event)) {
        step.record("system", "event", "pipeline_failed " + failed->submission_id + " " + failed->code);
        if (s.state == DialogState::Processing && failed->submission_id == s.current_submission) {
            s.state = DialogState::AwaitingSubmission;
            step.reply("pipeline_failed", {{"reason", failed->reason}});
        } else {
            step.help();
        }
    }
    return std::move(step.outcome());
}

DialogOutcome reject_busy(const DialogSession& session, const UserUpload& upload, const DialogContext& ctx,
                          const std::string& at) {
    if (session.state == DialogState::Closed) {
        throw Error(ErrorCode::SessionClosed, "session " + session.session_id + " is closed");
    }
    Step step(session, ctx, at);
    step.record("student", "upload", upload.file_name);
    step.reply("busy");
    return std::move(step.outcome());
}

}  // namespace teccobot
