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

#include "teccobot/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "teccobot/error.hpp"

namespace teccobot {

namespace {

constexpr std::array<std::pair<SubmissionStatus, std::string_view>, 6> kStatusNames = {{
    {SubmissionStatus::Received, "received"},
    {SubmissionStatus::Cleaned, "cleaned"},
    {SubmissionStatus::GraphBuilt, "graph_built"},
    {SubmissionStatus::Compared, "compared"},
    {SubmissionStatus::FeedbackReady, "feedback_ready"},
    {SubmissionStatus::Failed, "failed"},
}};

int rank_of(SubmissionStatus s) { return static_cast<int>(s); }

void write_fd(int fd, const std::string& data, const std::filesystem::path& path) {
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(fd, p, left);
        if (n < 0 && errno == EINTR) continue;
        if (n < 0) throw Error(ErrorCode::IoError, "write " + path.string() + ": " + std::strerror(errno));
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& data, bool sync) {
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp-" + random_id(4);
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) throw Error(ErrorCode::IoError, "open " + tmp.string() + ": " + std::strerror(errno));
    try {
        write_fd(fd, data, tmp);
        if (sync) ::fdatasync(fd);
    } catch (...) {
        ::close(fd);
        std::filesystem::remove(tmp);
        throw;
    }
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json status_to_json(const StatusRecord& r) {
    nlohmann::json j = {{"type", "status"}, {"status", std::string(to_string(r.status))}, {"at", r.at}};
    if (!r.blob.empty()) j["blob"] = r.blob;
    if (!r.extra_blob.empty()) j["extra_blob"] = r.extra_blob;
    if (!r.document_id.empty()) j["document_id"] = r.document_id;
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (!r.code.empty()) j["code"] = r.code;
    return j;
}

StatusRecord status_from_json(const nlohmann::json& j) {
    StatusRecord r;
    r.status = parse_submission_status(j.at("status").get<std::string>());
    r.at = j.value("at", "");
    r.blob = j.value("blob", "");
    r.extra_blob = j.value("extra_blob", "");
    r.document_id = j.value("document_id", "");
    r.reason = j.value("reason", "");
    r.code = j.value("code", "");
    return r;
}

nlohmann::json entry_to_json(const HistoryEntry& e) {
    nlohmann::json j = {{"speaker", e.speaker}, {"kind", e.kind}, {"text", e.text}, {"at", e.at}};
    if (!e.document_id.empty()) j["document_id"] = e.document_id;
    return j;
}

HistoryEntry entry_from_json(const nlohmann::json& j) {
    return {j.at("speaker").get<std::string>(), j.at("kind").get<std::string>(), j.at("text").get<std::string>(),
            j.value("document_id", ""), j.value("at", "")};
}

template <typename Fn>
auto parse_guard(const std::filesystem::path& path, Fn fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, "corrupt record in " + path.string() + ": " + e.what());
    }
}

std::vector<std::string> ids_in(const std::filesystem::path& dir, const std::string& extension) {
    std::vector<std::string> ids;
    if (!std::filesystem::exists(dir)) return ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == extension) ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

std::string_view to_string(SubmissionStatus s) {
    for (const auto& [status, name] : kStatusNames) {
        if (status == s) return name;
    }
    return "failed";
}

SubmissionStatus parse_submission_status(std::string_view text) {
    for (const auto& [status, name] : kStatusNames) {
        if (name == text) return status;
    }
    throw Error(ErrorCode::ParseError, "unknown submission status: " + std::string(text));
}

bool is_terminal(SubmissionStatus s) {
    return s == SubmissionStatus::FeedbackReady || s == SubmissionStatus::Failed;
}

bool is_valid_advance(SubmissionStatus from, SubmissionStatus to) {
    if (is_terminal(from)) return false;
    if (to == SubmissionStatus::Failed) return true;
    return rank_of(to) > rank_of(from);
}

const StatusRecord* Submission::record(SubmissionStatus s) const {
    for (const auto& r : log) {
        if (r.status == s) return &r;
    }
    return nullptr;
}

bool is_safe_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '-';
    });
}

void journal_append(const std::filesystem::path& path, const nlohmann::json& record, bool sync) {
    std::filesystem::create_directories(path.parent_path());
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0600);
    if (fd < 0) throw Error(ErrorCode::IoError, "open " + path.string() + ": " + std::strerror(errno));
    std::string line = record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    off_t size = ::lseek(fd, 0, SEEK_END);
    if (size > 0) {
        char last = '\n';
        if (::pread(fd, &last, 1, size - 1) == 1 && last != '\n') line.insert(line.begin(), '\n');
    }
    try {
        write_fd(fd, line, path);
        if (sync) ::fdatasync(fd);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

std::vector<nlohmann::json> journal_read(const std::filesystem::path& path) {
    std::string data = read_file(path);
    std::vector<nlohmann::json> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto nl = data.find('\n', pos);
        if (nl == std::string::npos) break;  // torn tail
        std::string_view line(data.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception&) {
            // a torn line followed by a later append; the append started a fresh line
            continue;
        }
    }
    return out;
}

// ------------------------------------------------------------ blobs

std::filesystem::path BlobStore::path_of(const std::string& hash) const {
    if (hash.size() != 64 || !is_safe_id(hash)) throw Error(ErrorCode::NotFound, "bad blob id: " + hash);
    return dir_ / hash.substr(0, 2) / hash;
}

std::string BlobStore::put(std::span<const std::uint8_t> bytes) {
    std::string hash = sha256_hex(bytes);
    auto path = path_of(hash);
    if (!std::filesystem::exists(path)) {
        write_file_atomic(path, std::string(bytes.begin(), bytes.end()), sync_);
    }
    return hash;
}

Bytes BlobStore::get(const std::string& hash) const {
    auto path = path_of(hash);
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::NotFound, "blob not found: " + hash);
    Bytes data = to_bytes(read_file(path));
    if (sha256_hex(data) != hash) throw Error(ErrorCode::IoError, "blob content does not match its id: " + hash);
    return data;
}

bool BlobStore::exists(const std::string& hash) const {
    try {
        return std::filesystem::exists(path_of(hash));
    } catch (const Error&) {
        return false;
    }
}

void BlobStore::remove(const std::string& hash) {
    if (exists(hash)) std::filesystem::remove(path_of(hash));
}

// ------------------------------------------------------------ submissions

void SubmissionStore::create(const Submission& s) {
    std::lock_guard lock(mutex_);
    auto path = path_of(s.submission_id);
    if (std::filesystem::exists(path)) throw Error(ErrorCode::InvalidArgument, "submission exists: " + s.submission_id);
    nlohmann::json header = {{"type", "submission"},         {"submission_id", s.submission_id},
                             {"session_id", s.session_id},   {"student_id", s.student_id},
                             {"assignment_id", s.assignment_id}, {"file_name", s.file_name},
                             {"received_at", s.received_at}};
    journal_append(path, header, sync_);
    for (const auto& r : s.log) journal_append(path, status_to_json(r), sync_);
}

void SubmissionStore::advance(const std::string& submission_id, const StatusRecord& record) {
    std::lock_guard lock(mutex_);
    auto path = path_of(submission_id);
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::NotFound, "unknown submission: " + submission_id);
    auto records = journal_read(path);
    SubmissionStatus current = SubmissionStatus::Received;
    for (const auto& r : records) {
        if (r.value("type", "") == "status") current = parse_submission_status(r.at("status").get<std::string>());
    }
    if (!is_valid_advance(current, record.status)) {
        throw Error(ErrorCode::InvalidArgument, "submission " + submission_id + " cannot move from " +
                                                    std::string(to_string(current)) + " to " +
                                                    std::string(to_string(record.status)));
    }
    journal_append(path, status_to_json(record), sync_);
}

std::optional<Submission> SubmissionStore::load(const std::string& submission_id) const {
    std::lock_guard lock(mutex_);
    if (!is_safe_id(submission_id)) return std::nullopt;
    auto path = path_of(submission_id);
    if (!std::filesystem::exists(path)) return std::nullopt;
    return parse_guard(path, [&]() -> std::optional<Submission> {
        Submission s;
        for (const auto& r : journal_read(path)) {
            std::string type = r.value("type", "");
            if (type == "submission") {
                s.submission_id = r.at("submission_id").get<std::string>();
                s.session_id = r.at("session_id").get<std::string>();
                s.student_id = r.at("student_id").get<std::string>();
                s.assignment_id = r.at("assignment_id").get<std::string>();
                s.file_name = r.value("file_name", "");
                s.received_at = r.value("received_at", "");
            } else if (type == "status") {
                s.log.push_back(status_from_json(r));
            }
        }
        if (s.submission_id.empty() || s.log.empty()) return std::nullopt;
        return s;
    });
}

std::vector<Submission> SubmissionStore::load_all() const {
    std::vector<Submission> out;
    for (const auto& id : ids_in(dir_, ".jsonl")) {
        if (auto s = load(id)) out.push_back(std::move(*s));
    }
    return out;
}

void SubmissionStore::remove(const std::string& submission_id) {
    std::lock_guard lock(mutex_);
    std::filesystem::remove(path_of(submission_id));
}

// ------------------------------------------------------------ sessions

void SessionStore::create(const DialogSession& s) {
    nlohmann::json header = {{"type", "created"},
                             {"session_id", s.session_id},
                             {"student_id", s.student_id},
                             {"assignment_id", s.assignment_id},
                             {"language", std::string(to_string(s.language))},
                             {"state", std::string(to_string(s.state))}};
    journal_append(path_of(s.session_id), header, sync_);
}

void SessionStore::append_step(const DialogOutcome& outcome) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : outcome.appended) entries.push_back(entry_to_json(e));
    nlohmann::json step = {{"type", "step"},
                           {"state", std::string(to_string(outcome.session.state))},
                           {"current_submission", outcome.session.current_submission},
                           {"entries", entries}};
    journal_append(path_of(outcome.session.session_id), step, sync_);
}

std::optional<DialogSession> SessionStore::load(const std::string& session_id) const {
    if (!is_safe_id(session_id)) return std::nullopt;
    auto path = path_of(session_id);
    if (!std::filesystem::exists(path)) return std::nullopt;
    return parse_guard(path, [&]() -> std::optional<DialogSession> {
        auto records = journal_read(path);
        if (records.empty() || records[0].value("type", "") != "created") return std::nullopt;
        DialogSession s;
        const auto& h = records[0];
        s.session_id = h.at("session_id").get<std::string>();
        s.student_id = h.at("student_id").get<std::string>();
        s.assignment_id = h.at("assignment_id").get<std::string>();
        s.language = parse_language(h.at("language").get<std::string>());
        s.state = parse_dialog_state(h.at("state").get<std::string>());
        for (std::size_t i = 1; i < records.size(); ++i) {
            const auto& r = records[i];
            if (r.value("type", "") != "step") continue;
            s.state = parse_dialog_state(r.at("state").get<std::string>());
            s.current_submission = r.value("current_submission", "");
            for (const auto& e : r.at("entries")) s.history.push_back(entry_from_json(e));
        }
        return s;
    });
}

std::vector<DialogSession> SessionStore::load_all() const {
    std::vector<DialogSession> out;
    for (const auto& id : ids_in(dir_, ".jsonl")) {
        if (auto s = load(id)) out.push_back(std::move(*s));
    }
    return out;
}

void SessionStore::remove(const std::string& session_id) { std::filesystem::remove(path_of(session_id)); }

// ------------------------------------------------------------ documents

void DocumentIndex::put(const DocumentRecord& r) {
    nlohmann::json j = {{"document_id", r.document_id}, {"owner", r.owner},         {"session_id", r.session_id},
                        {"submission_id", r.submission_id}, {"blob", r.blob}, {"created_at", r.created_at}};
    if (!r.pdf_blob.empty()) j["pdf_blob"] = r.pdf_blob;
    write_file_atomic(dir_ / (r.document_id + ".json"), j.dump(2) + "\n", sync_);
}

std::optional<DocumentRecord> DocumentIndex::get(const std::string& document_id) const {
    if (!is_safe_id(document_id)) return std::nullopt;
    auto path = dir_ / (document_id + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    return parse_guard(path, [&] {
        auto j = nlohmann::json::parse(read_file(path));
        return DocumentRecord{j.at("document_id").get<std::string>(), j.at("owner").get<std::string>(),
                              j.at("session_id").get<std::string>(), j.at("submission_id").get<std::string>(),
                              j.at("blob").get<std::string>(),       j.value("created_at", ""),
                              j.value("pdf_blob", "")};
    });
}

std::vector<DocumentRecord> DocumentIndex::for_session(const std::string& session_id) const {
    std::vector<DocumentRecord> out;
    for (const auto& id : ids_in(dir_, ".json")) {
        auto r = get(id);
        if (r && r->session_id == session_id) out.push_back(*r);
    }
    return out;
}

void DocumentIndex::remove(const std::string& document_id) {
    if (is_safe_id(document_id)) std::filesystem::remove(dir_ / (document_id + ".json"));
}

}  // namespace teccobot
