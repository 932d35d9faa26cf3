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

// File-backed persistence under a data directory:
//
//   sessions/<session_id>.jsonl        session journal (created + steps)
//   submissions/<submission_id>.jsonl  header + status journal
//   documents/<document_id>.json       document index entry
//   blobs/<aa>/<sha256>                content-addressed blobs
//
// Journals are append-only JSON lines. A torn final line (crash during a
// write) is ignored on replay.

#pragma once

#include <json.hpp>

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teccobot/dialog.hpp"
#include "teccobot/hashing.hpp"

namespace teccobot {

enum class SubmissionStatus { Received, Cleaned, GraphBuilt, Compared, FeedbackReady, Failed };

std::string_view to_string(SubmissionStatus s);
/// Throws Error(ParseError).
SubmissionStatus parse_submission_status(std::string_view text);
bool is_terminal(SubmissionStatus s);
/// True if `to` may follow `from`: forward along the stage order, or
/// Failed from any non-terminal status.
bool is_valid_advance(SubmissionStatus from, SubmissionStatus to);

struct StatusRecord {
    SubmissionStatus status = SubmissionStatus::Received;
    std::string at;
    std::string blob;         // artifact written at this stage, if any
    std::string extra_blob;   // second artifact (the document at Compared)
    std::string document_id;  // Compared, FeedbackReady
    std::string reason;       // Failed
    std::string code;         // Failed

    bool operator==(const StatusRecord&) const = default;
};

struct Submission {
    std::string submission_id;
    std::string session_id;
    std::string student_id;
    std::string assignment_id;
    std::string file_name;
    std::string received_at;
    std::vector<StatusRecord> log;  // first entry is Received

    SubmissionStatus status() const { return log.back().status; }
    const StatusRecord* record(SubmissionStatus s) const;
};

/// Appends one JSON line; optionally fsyncs.
void journal_append(const std::filesystem::path& path, const nlohmann::json& record, bool sync);
/// All complete lines; a trailing torn line is dropped.
std::vector<nlohmann::json> journal_read(const std::filesystem::path& path);

class BlobStore {
public:
    BlobStore(std::filesystem::path dir, bool sync) : dir_(std::move(dir)), sync_(sync) {}

    /// Writes atomically (temp file + rename); returns the SHA-256 hex.
    std::string put(std::span<const std::uint8_t> bytes);
    /// Throws Error(NotFound), Error(IoError) if the content no longer
    /// matches its hash.
    Bytes get(const std::string& hash) const;
    bool exists(const std::string& hash) const;
    void remove(const std::string& hash);

private:
    std::filesystem::path path_of(const std::string& hash) const;

    std::filesystem::path dir_;
    bool sync_;
};

class SubmissionStore {
public:
    SubmissionStore(std::filesystem::path dir, bool sync) : dir_(std::move(dir)), sync_(sync) {}

    /// Writes the header and the Received record.
    void create(const Submission& submission);
    /// Throws Error(InvalidArgument) for a backwards move, Error(NotFound).
    void advance(const std::string& submission_id, const StatusRecord& record);
    std::optional<Submission> load(const std::string& submission_id) const;
    std::vector<Submission> load_all() const;
    void remove(const std::string& submission_id);

private:
    std::filesystem::path path_of(const std::string& id) const { return dir_ / (id + ".jsonl"); }

    mutable std::mutex mutex_;
    std::filesystem::path dir_;
    bool sync_;
};

class SessionStore {
public:
    SessionStore(std::filesystem::path dir, bool sync) : dir_(std::move(dir)), sync_(sync) {}

    void create(const DialogSession& session);
    /// Persists the new state and the appended history entries.
    void append_step(const DialogOutcome& outcome);
    std::optional<DialogSession> load(const std::string& session_id) const;
    std::vector<DialogSession> load_all() const;
    void remove(const std::string& session_id);

private:
    std::filesystem::path path_of(const std::string& id) const { return dir_ / (id + ".jsonl"); }

    std::filesystem::path dir_;
    bool sync_;
};

struct DocumentRecord {
    std::string document_id;
    std::string owner;
    std::string session_id;
    std::string submission_id;
    std::string blob;
    std::string created_at;
    std::string pdf_blob;  // set when a PDF converter is configured

    bool operator==(const DocumentRecord&) const = default;
};

class DocumentIndex {
public:
    DocumentIndex(std::filesystem::path dir, bool sync) : dir_(std::move(dir)), sync_(sync) {}

    void put(const DocumentRecord& record);
    std::optional<DocumentRecord> get(const std::string& document_id) const;
    std::vector<DocumentRecord> for_session(const std::string& session_id) const;
    void remove(const std::string& document_id);

private:
    std::filesystem::path dir_;
    bool sync_;
};

/// Accepts only ids made of [0-9a-zA-Z_-], so ids can name files.
bool is_safe_id(std::string_view id);

}  // namespace teccobot
