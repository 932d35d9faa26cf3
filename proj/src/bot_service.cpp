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

#include "teccobot/bot_service.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "teccobot/clock.hpp"
#include "teccobot/error.hpp"
#include "teccobot/graph_compare.hpp"
#include "teccobot/relay_network.hpp"
#include "teccobot/text_pipeline.hpp"

namespace teccobot {

namespace {

constexpr const char* kBotNode = "chat-front";
constexpr const char* kRelayNode = "relay";
constexpr const char* kFeedbackNode = "feedback-service";

void log_error(const std::string& message) { std::cerr << "teccobot: " << message << "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_absolute() ? p : base / p;
}

template <typename T>
T config_field(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ConfigError, std::string("config field has the wrong type: ") + key);
    }
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, "unknown config field " + where + "." + key);
    }
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

struct SessionSlot {
    std::mutex mutex;
    DialogSession session;
    bool deleted = false;
};

StatusRecord stage_record(SubmissionStatus status, std::string blob = {}, std::string extra_blob = {},
                          std::string document_id = {}) {
    StatusRecord r;
    r.status = status;
    r.blob = std::move(blob);
    r.extra_blob = std::move(extra_blob);
    r.document_id = std::move(document_id);
    return r;
}

/// A submission failed for a student-visible reason.
struct StageFailure {
    std::string code;
    std::map<std::string, std::string> fields;
};

}  // namespace

// ------------------------------------------------------------ config

ServiceConfig ServiceConfig::from_json(const nlohmann::json& j) {
    check_keys(j,
               {"version", "data_dir", "resource_dir", "listen", "issuer_public_key", "queue_depth", "workers",
                "max_upload_bytes", "fsync", "graph", "relay", "pdf_converter", "assignments"},
               "config");
    if (config_field<int>(j, "version", 0) != kConfigVersion) {
        throw Error(ErrorCode::ConfigError, "unsupported config version (expected " +
                                                std::to_string(kConfigVersion) + ")");
    }
    ServiceConfig c;
    c.data_dir = config_field<std::string>(j, "data_dir", "");
    c.resource_dir = config_field<std::string>(j, "resource_dir", c.resource_dir.string());
    if (j.contains("listen")) {
        const auto& l = j["listen"];
        check_keys(l, {"host", "port"}, "listen");
        c.host = config_field<std::string>(l, "host", c.host);
        c.port = config_field<std::uint16_t>(l, "port", c.port);
    }
    std::string issuer = config_field<std::string>(j, "issuer_public_key", "");
    try {
        c.issuer_public_key = from_hex(issuer);
    } catch (const Error&) {
        throw Error(ErrorCode::ConfigError, "issuer_public_key is not hex");
    }
    if (c.issuer_public_key.size() != 32) throw Error(ErrorCode::ConfigError, "issuer_public_key must be 32 bytes");
    c.queue_depth = config_field<std::size_t>(j, "queue_depth", c.queue_depth);
    c.workers = config_field<std::size_t>(j, "workers", c.workers);
    c.max_upload_bytes = config_field<std::size_t>(j, "max_upload_bytes", c.max_upload_bytes);
    c.fsync = config_field<bool>(j, "fsync", c.fsync);
    c.pdf_converter = config_field<std::string>(j, "pdf_converter", "");
    if (c.queue_depth == 0 || c.workers == 0) throw Error(ErrorCode::ConfigError, "queue_depth and workers must be > 0");
    if (j.contains("graph")) {
        const auto& g = j["graph"];
        check_keys(g, {"max_concepts", "max_edges"}, "graph");
        c.graph.max_concepts = config_field<std::size_t>(g, "max_concepts", c.graph.max_concepts);
        c.graph.max_edges = config_field<std::size_t>(g, "max_edges", c.graph.max_edges);
    }
    if (j.contains("relay")) {
        const auto& r = j["relay"];
        check_keys(r, {"transport", "max_attempts", "backoff_ms", "reply_timeout_ms"}, "relay");
        c.relay.transport = config_field<std::string>(r, "transport", c.relay.transport);
        c.relay.max_attempts = config_field<int>(r, "max_attempts", c.relay.max_attempts);
        c.relay.backoff_ms = config_field<int>(r, "backoff_ms", c.relay.backoff_ms);
        c.relay.reply_timeout_ms = config_field<int>(r, "reply_timeout_ms", c.relay.reply_timeout_ms);
        if (c.relay.transport != "in_process" && c.relay.transport != "tcp") {
            throw Error(ErrorCode::ConfigError, "relay.transport must be in_process or tcp");
        }
    }
    if (!j.contains("assignments") || !j["assignments"].is_array() || j["assignments"].empty()) {
        throw Error(ErrorCode::ConfigError, "config needs at least one assignment");
    }
    for (const auto& a : j["assignments"]) {
        check_keys(a,
                   {"assignment_id", "title", "prompt", "language", "mode", "template_id", "min_words",
                    "reference_text", "reference_graph"},
                   "assignments[]");
        AssignmentConfig ac;
        ac.assignment_id = config_field<std::string>(a, "assignment_id", "");
        if (!is_safe_id(ac.assignment_id)) throw Error(ErrorCode::ConfigError, "bad assignment_id");
        ac.title = config_field<std::string>(a, "title", ac.assignment_id);
        ac.prompt = config_field<std::string>(a, "prompt", "");
        try {
            ac.language = parse_language(config_field<std::string>(a, "language", "en"));
            ac.mode = parse_feedback_mode(config_field<std::string>(a, "mode", "comparison"));
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, "assignment " + ac.assignment_id + ": " + e.what());
        }
        ac.template_id = config_field<std::string>(a, "template_id", std::string(to_string(ac.mode)));
        ac.min_words = config_field<std::size_t>(a, "min_words", ac.min_words);
        ac.reference_text = config_field<std::string>(a, "reference_text", "");
        ac.reference_graph = config_field<std::string>(a, "reference_graph", "");
        if (ac.reference_text.empty() == ac.reference_graph.empty()) {
            throw Error(ErrorCode::ConfigError,
                        "assignment " + ac.assignment_id + " needs exactly one of reference_text, reference_graph");
        }
        c.assignments.push_back(std::move(ac));
    }
    return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    ServiceConfig c = from_json(j);
    c.apply_env_overrides();
    if (c.data_dir.empty()) throw Error(ErrorCode::ConfigError, "data_dir is not set");
    c.data_dir = resolve(c.data_dir, path.parent_path());
    c.resource_dir = resolve(c.resource_dir, path.parent_path());
    return c;
}

void ServiceConfig::apply_env_overrides() {
    if (const char* v = std::getenv("TECCOBOT_DATA_DIR"); v && *v) data_dir = v;
    if (const char* v = std::getenv("TECCOBOT_RESOURCE_DIR"); v && *v) resource_dir = v;
    if (const char* v = std::getenv("TECCOBOT_HOST"); v && *v) host = v;
    if (const char* v = std::getenv("TECCOBOT_PORT"); v && *v) {
        try {
            int p = std::stoi(v);
            if (p < 0 || p > 65535) throw std::out_of_range("port");
            port = static_cast<std::uint16_t>(p);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, std::string("TECCOBOT_PORT is not a port: ") + v);
        }
    }
}

nlohmann::json ServiceConfig::to_json() const {
    nlohmann::json assignments_json = nlohmann::json::array();
    for (const auto& a : assignments) {
        nlohmann::json aj = {{"assignment_id", a.assignment_id},
                             {"title", a.title},
                             {"prompt", a.prompt},
                             {"language", std::string(to_string(a.language))},
                             {"mode", std::string(to_string(a.mode))},
                             {"template_id", a.template_id},
                             {"min_words", a.min_words}};
        if (!a.reference_text.empty()) aj["reference_text"] = a.reference_text.string();
        if (!a.reference_graph.empty()) aj["reference_graph"] = a.reference_graph.string();
        assignments_json.push_back(aj);
    }
    return {{"version", kConfigVersion},
            {"data_dir", data_dir.string()},
            {"resource_dir", resource_dir.string()},
            {"listen", {{"host", host}, {"port", port}}},
            {"issuer_public_key", to_hex(issuer_public_key)},
            {"queue_depth", queue_depth},
            {"workers", workers},
            {"max_upload_bytes", max_upload_bytes},
            {"fsync", fsync},
            {"graph", {{"max_concepts", graph.max_concepts}, {"max_edges", graph.max_edges}}},
            {"relay",
             {{"transport", relay.transport},
              {"max_attempts", relay.max_attempts},
              {"backoff_ms", relay.backoff_ms},
              {"reply_timeout_ms", relay.reply_timeout_ms}}},
            {"pdf_converter", pdf_converter},
            {"assignments", assignments_json}};
}

Assignment build_assignment(const AssignmentConfig& ac, const std::filesystem::path& resource_dir,
                            const GraphParams& params) {
    Assignment a;
    a.assignment_id = ac.assignment_id;
    a.title = ac.title;
    a.prompt_text = ac.prompt;
    a.mode = ac.mode;
    a.template_id = ac.template_id;
    a.language = ac.language;
    a.min_words = ac.min_words;
    try {
        if (!ac.reference_graph.empty()) {
            a.reference_graph = concept_graph_from_json(read_text_file(resolve(ac.reference_graph, resource_dir)));
        } else {
            auto resources = LanguageResources::load(resource_dir, ac.language);
            RawSubmissionText raw(read_text_file(resolve(ac.reference_text, resource_dir)), ac.language,
                                  ac.assignment_id);
            a.reference_graph = build_concept_graph(analyze_text(raw, resources, 0), params, ac.assignment_id,
                                                    resources.stopwords.content_hash());
        }
        FeedbackTemplate::load(resource_dir / "templates", a.template_id, a.language);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, "assignment " + ac.assignment_id + ": " + e.what());
    }
    if (a.reference_graph.vertices.empty()) {
        throw Error(ErrorCode::ConfigError, "assignment " + ac.assignment_id + " has an empty reference graph");
    }
    return a;
}

// ------------------------------------------------------------ service

struct BotService::Impl {
    BotService& owner;
    const ServiceConfig& config;
    ServiceHooks hooks;

    std::map<Language, LanguageResources> resources;
    std::map<Language, DialogScript> scripts;

    SessionStore sessions;
    SubmissionStore submissions;
    DocumentIndex documents;
    BlobStore blobs;

    Registry registry;
    std::unique_ptr<InProcessTransport> in_process;
    std::unique_ptr<TcpTransport> tcp;
    Transport* transport = nullptr;
    std::unique_ptr<RelayNode> bot_node;
    std::unique_ptr<RelayNode> feedback_node;
    std::unique_ptr<RelayHop> relay_hop;
    std::vector<std::unique_ptr<TcpListener>> listeners;
    std::unique_ptr<Router> bot_router;
    std::unique_ptr<Router> feedback_router;
    Deduplicator bot_dedup;
    Deduplicator feedback_dedup;

    std::mutex pending_mutex;
    std::map<std::string, std::shared_ptr<std::promise<nlohmann::json>>> pending;

    std::mutex template_mutex;
    std::map<std::pair<std::string, Language>, FeedbackTemplate> templates;

    BlockingQueue<std::string> queue;
    std::vector<std::thread> workers;
    std::thread bot_consumer;
    std::thread feedback_consumer;
    std::atomic<bool> stopping{false};
    std::atomic<bool> crashed{false};

    std::mutex slots_mutex;
    std::map<std::string, std::shared_ptr<SessionSlot>> slots;

    std::mutex idle_mutex;
    std::condition_variable idle_cv;
    std::size_t in_flight = 0;

    Impl(BotService& o, const ServiceConfig& c, ServiceHooks h)
        : owner(o),
          config(c),
          hooks(std::move(h)),
          sessions(c.data_dir / "sessions", c.fsync),
          submissions(c.data_dir / "submissions", c.fsync),
          documents(c.data_dir / "documents", c.fsync),
          blobs(c.data_dir / "blobs", c.fsync),
          queue(c.queue_depth) {}

    // ---------------------------------------------------- relay wiring

    void start_network() {
        auto key_dir = config.data_dir / "keys";
        NodeKeys bot_keys = NodeKeys::load_or_create(key_dir / "chat-front.key", kBotNode);
        NodeKeys relay_keys = NodeKeys::load_or_create(key_dir / "relay.key", kRelayNode);
        NodeKeys feedback_keys = NodeKeys::load_or_create(key_dir / "feedback-service.key", kFeedbackNode);
        for (const auto* k : {&bot_keys, &relay_keys, &feedback_keys}) registry.register_node(k->identity());
        {
            std::ofstream out(key_dir / "registry.txt", std::ios::trunc);
            out << registry.to_text();
        }
        bot_node = std::make_unique<RelayNode>(bot_keys, registry);
        feedback_node = std::make_unique<RelayNode>(feedback_keys, registry);
        RetryPolicy policy{config.relay.max_attempts, std::chrono::milliseconds(config.relay.backoff_ms), 2.0};

        if (config.relay.transport == "tcp") {
            tcp = std::make_unique<TcpTransport>();
            transport = tcp.get();
            relay_hop = std::make_unique<RelayHop>(registry, *transport, policy);
            auto add = [&](const char* id, FrameHandler handler) {
                listeners.push_back(std::make_unique<TcpListener>("127.0.0.1", 0, std::move(handler)));
                tcp->set_endpoint(id, "127.0.0.1", listeners.back()->port());
            };
            add(kBotNode, bot_node->handler());
            add(kFeedbackNode, feedback_node->handler());
            add(kRelayNode, [this](const Bytes& f) { relay_hop->on_frame(f); });
        } else {
            in_process = std::make_unique<InProcessTransport>();
            transport = in_process.get();
            relay_hop = std::make_unique<RelayHop>(registry, *transport, policy);
            in_process->attach(kBotNode, bot_node->handler());
            in_process->attach(kFeedbackNode, feedback_node->handler());
            in_process->attach(kRelayNode, [this](const Bytes& f) { relay_hop->on_frame(f); });
        }
        bot_router = std::make_unique<Router>(registry, *transport, policy, kRelayNode);
        feedback_router = std::make_unique<Router>(registry, *transport, policy, kRelayNode);

        bot_consumer = std::thread([this] { consume_bot_inbox(); });
        feedback_consumer = std::thread([this] { consume_feedback_inbox(); });
    }

    void consume_bot_inbox() {
        while (!stopping) {
            auto e = bot_node->inbox().pop_for(std::chrono::milliseconds(50));
            if (!e || !bot_dedup.first_time(e->envelope_id)) continue;
            try {
                auto reply = nlohmann::json::parse(to_string(bot_node->open(*e)));
                std::shared_ptr<std::promise<nlohmann::json>> waiter;
                {
                    std::lock_guard lock(pending_mutex);
                    auto it = pending.find(reply.value("submission_id", ""));
                    if (it == pending.end()) continue;  // stale reply from before a restart
                    waiter = it->second;
                    pending.erase(it);
                }
                waiter->set_value(std::move(reply));
            } catch (const std::exception& ex) {
                log_error(std::string("dropping reply envelope: ") + ex.what());
            }
        }
    }

    void consume_feedback_inbox() {
        while (!stopping) {
            auto e = feedback_node->inbox().pop_for(std::chrono::milliseconds(50));
            if (!e || !feedback_dedup.first_time(e->envelope_id)) continue;
            nlohmann::json reply;
            try {
                reply = handle_compare_request(nlohmann::json::parse(to_string(feedback_node->open(*e))));
            } catch (const Error& ex) {
                reply = {{"type", "compare_error"}, {"code", std::string(to_string(ex.code()))}, {"message", ex.what()}};
            } catch (const std::exception& ex) {
                log_error(std::string("dropping request envelope: ") + ex.what());
                continue;
            }
            try {
                if (!reply.contains("submission_id")) continue;
                feedback_router->route(feedback_node->seal_to(e->sender, to_bytes(reply.dump())));
            } catch (const std::exception& ex) {
                log_error(std::string("cannot return feedback: ") + ex.what());
            }
        }
    }

    const FeedbackTemplate& template_for(const std::string& id, Language lang) {
        std::lock_guard lock(template_mutex);
        auto key = std::make_pair(id, lang);
        auto it = templates.find(key);
        if (it == templates.end()) {
            it = templates.emplace(key, FeedbackTemplate::load(config.resource_dir / "templates", id, lang)).first;
        }
        return it->second;
    }

    /// The feedback node's work: compare, fill the template, export.
    nlohmann::json handle_compare_request(const nlohmann::json& req) {
        std::string submission_id = req.at("submission_id").get<std::string>();
        try {
            ConceptGraph student = concept_graph_from_json(req.at("student_graph").get<std::string>());
            ConceptGraph reference = concept_graph_from_json(req.at("reference_graph").get<std::string>());
            Language lang = parse_language(req.at("language").get<std::string>());
            FeedbackMode mode = parse_feedback_mode(req.at("mode").get<std::string>());
            ComparisonReport report = compare(student, reference);
            const FeedbackTemplate& t = template_for(req.at("template_id").get<std::string>(), lang);
            FeedbackDocument doc = fill_template(t, report, mode, student, reference,
                                                 {req.at("document_id").get<std::string>(),
                                                  req.at("created_at").get<std::string>()});
            return {{"type", "compare_reply"},
                    {"submission_id", submission_id},
                    {"document_id", doc.document_id},
                    {"report", to_canonical_json(report)},
                    {"document_html", export_document(doc)}};
        } catch (const Error& ex) {
            return {{"type", "compare_error"},
                    {"submission_id", submission_id},
                    {"code", std::string(to_string(ex.code()))},
                    {"message", ex.what()}};
        }
    }

    // ---------------------------------------------------- sessions

    std::shared_ptr<SessionSlot> slot_for(const std::string& session_id) {
        std::lock_guard lock(slots_mutex);
        auto it = slots.find(session_id);
        return it == slots.end() ? nullptr : it->second;
    }

    std::shared_ptr<SessionSlot> owned_slot(const std::string& subject, const std::string& session_id) {
        auto slot = slot_for(session_id);
        if (!slot) throw Error(ErrorCode::NotFound, "no such session");
        if (slot->session.student_id != subject) throw Error(ErrorCode::Forbidden, "session belongs to another user");
        return slot;
    }

    DialogContext context_for(const DialogSession& s) {
        const Assignment& a = owner.assignment(s.assignment_id);
        return {scripts.at(a.language), a.title, a.prompt_text};
    }

    /// Caller holds slot->mutex.
    void commit(SessionSlot& slot, const DialogOutcome& outcome) {
        sessions.append_step(outcome);
        slot.session = outcome.session;
    }

    /// Delivers a pipeline result if the session still waits for it.
    void deliver_result(const std::string& session_id, const DialogEvent& event, const std::string& submission_id) {
        auto slot = slot_for(session_id);
        if (!slot) return;
        std::lock_guard lock(slot->mutex);
        if (slot->deleted || slot->session.state != DialogState::Processing ||
            slot->session.current_submission != submission_id) {
            return;
        }
        commit(*slot, handle_event(slot->session, event, context_for(slot->session), utc_now()));
    }

    // ---------------------------------------------------- pipeline

    Bytes read_private(const std::string& hash) { return decrypt_with(bot_node->keys(), blobs.get(hash)); }

    std::string write_private(std::string_view data) {
        return blobs.put(encrypt_for(bot_node->keys().identity(), to_bytes(data)));
    }

    void advance(const Submission& sub, StatusRecord record) {
        if (record.at.empty()) record.at = utc_now();
        submissions.advance(sub.submission_id, record);
        if (hooks.after_stage) hooks.after_stage(sub.submission_id, record.status);
    }

    bool session_alive(const std::string& session_id) {
        auto slot = slot_for(session_id);
        if (!slot) return false;
        std::lock_guard lock(slot->mutex);
        return !slot->deleted;
    }

    void run_stage(const Submission& sub, const Assignment& a) {
        switch (sub.status()) {
            case SubmissionStatus::Received: {
                std::string raw_text = to_string(read_private(sub.record(SubmissionStatus::Received)->blob));
                CleanText clean;
                try {
                    clean = clean_text(RawSubmissionText(raw_text, a.language, sub.submission_id), 0);
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::InvalidEncoding) throw StageFailure{"invalid_encoding", {}};
                    throw;
                }
                if (clean.word_count < a.min_words) {
                    throw StageFailure{"too_short",
                                       {{"words", std::to_string(clean.word_count)},
                                        {"min", std::to_string(a.min_words)}}};
                }
                advance(sub, stage_record(SubmissionStatus::Cleaned, write_private(clean.text)));
                return;
            }
            case SubmissionStatus::Cleaned: {
                CleanText clean{to_string(read_private(sub.record(SubmissionStatus::Cleaned)->blob)), a.language, 0};
                clean.word_count = count_words(clean.text);
                const auto& res = resources.at(a.language);
                std::vector<TokenizedSentence> sentences;
                for (const auto& s : segment_sentences(clean, res.abbreviations)) {
                    sentences.push_back(tokenize_normalize(s, a.language, res.stopwords));
                }
                ConceptGraph g;
                try {
                    g = build_concept_graph(sentences, config.graph, sub.submission_id,
                                            res.stopwords.content_hash());
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::EmptyInput || e.code() == ErrorCode::EmptyConcepts) {
                        throw StageFailure{"no_concepts", {}};
                    }
                    throw;
                }
                advance(sub, stage_record(SubmissionStatus::GraphBuilt, write_private(to_canonical_json(g))));
                return;
            }
            case SubmissionStatus::GraphBuilt: {
                std::string graph_text = to_string(read_private(sub.record(SubmissionStatus::GraphBuilt)->blob));
                nlohmann::json request = {{"type", "compare_request"},
                                          {"submission_id", sub.submission_id},
                                          {"assignment_id", a.assignment_id},
                                          {"student_graph", graph_text},
                                          {"reference_graph", to_canonical_json(a.reference_graph)},
                                          {"template_id", a.template_id},
                                          {"mode", std::string(to_string(a.mode))},
                                          {"language", std::string(to_string(a.language))},
                                          {"document_id", random_id(16)},
                                          {"created_at", utc_now()}};
                nlohmann::json reply = request_feedback(sub.submission_id, request);
                if (reply.value("type", "") != "compare_reply") {
                    log_error("feedback node failed: " + reply.value("message", std::string("unknown error")));
                    throw StageFailure{"internal", {}};
                }
                std::string report_blob = write_private(reply.at("report").get<std::string>());
                std::string document_blob = write_private(reply.at("document_html").get<std::string>());
                advance(sub, stage_record(SubmissionStatus::Compared, report_blob, document_blob,
                                          reply.at("document_id").get<std::string>()));
                return;
            }
            case SubmissionStatus::Compared: {
                const StatusRecord* compared = sub.record(SubmissionStatus::Compared);
                DocumentRecord record{compared->document_id, sub.student_id, sub.session_id, sub.submission_id,
                                      compared->extra_blob,  compared->at,   {}};
                if (!config.pdf_converter.empty()) record.pdf_blob = convert_pdf(compared->extra_blob);
                documents.put(record);
                advance(sub, stage_record(SubmissionStatus::FeedbackReady, {}, {}, compared->document_id));
                return;
            }
            default:
                return;
        }
    }

    nlohmann::json request_feedback(const std::string& submission_id, const nlohmann::json& request) {
        auto waiter = std::make_shared<std::promise<nlohmann::json>>();
        auto future = waiter->get_future();
        {
            std::lock_guard lock(pending_mutex);
            pending[submission_id] = waiter;
        }
        auto forget = [&] {
            std::lock_guard lock(pending_mutex);
            pending.erase(submission_id);
        };
        try {
            bot_router->route(bot_node->seal_to(kFeedbackNode, to_bytes(request.dump())));
        } catch (const Error& e) {
            forget();
            log_error(std::string("relay: ") + e.what());
            throw StageFailure{"unavailable", {}};
        }
        if (future.wait_for(std::chrono::milliseconds(config.relay.reply_timeout_ms)) != std::future_status::ready) {
            forget();
            throw StageFailure{"unavailable", {}};
        }
        return future.get();
    }

    std::string convert_pdf(const std::string& document_blob) {
        auto dir = std::filesystem::temp_directory_path() / ("teccobot-pdf-" + random_id(8));
        std::filesystem::create_directories(dir);
        auto input = dir / "feedback.html";
        auto output = dir / "feedback.pdf";
        {
            std::ofstream out(input, std::ios::binary);
            out << to_string(read_private(document_blob));
        }
        std::string command = fill_fields(config.pdf_converter, {{"input", shell_quote(input.string())},
                                                                 {"output", shell_quote(output.string())}});
        std::string blob;
        if (std::system(command.c_str()) == 0 && std::filesystem::exists(output)) {
            std::ifstream in(output, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            blob = write_private(buf.str());
        } else {
            log_error("pdf converter failed; serving HTML only");
        }
        std::filesystem::remove_all(dir);
        return blob;
    }

    std::string summary_for(const Submission& sub, const Assignment& a) {
        const auto* compared = sub.record(SubmissionStatus::Compared);
        if (!compared) return {};
        ComparisonReport report = comparison_report_from_json(to_string(read_private(compared->blob)));
        return scripts.at(a.language)
            .reply("summary", {{"shared", std::to_string(report.shared_concepts.size())},
                               {"student", std::to_string(report.shared_concepts.size() + report.only_student.size())}});
    }

    void fail(const Submission& sub, const Assignment* a, const StageFailure& failure) {
        Language lang = a ? a->language : Language::EN;
        StatusRecord r{SubmissionStatus::Failed, {}, {}, {}, {}, scripts.at(lang).failure_reason(failure.code, failure.fields),
                       failure.code};
        advance(sub, r);
    }

    void process(const std::string& submission_id) {
        bool first = true;
        while (!stopping && !crashed) {
            auto sub = submissions.load(submission_id);
            if (!sub) return;
            if (!session_alive(sub->session_id)) return;
            if (first && sub->status() == SubmissionStatus::Received && hooks.after_stage) {
                hooks.after_stage(submission_id, SubmissionStatus::Received);
            }
            first = false;
            const Assignment* a = nullptr;
            try {
                a = &owner.assignment(sub->assignment_id);
            } catch (const Error&) {
                fail(*sub, nullptr, {"internal", {}});
                continue;
            }
            if (sub->status() == SubmissionStatus::FeedbackReady) {
                deliver_result(sub->session_id,
                               PipelineDone{submission_id, sub->record(SubmissionStatus::FeedbackReady)->document_id,
                                            summary_for(*sub, *a)},
                               submission_id);
                return;
            }
            if (sub->status() == SubmissionStatus::Failed) {
                const auto& r = sub->log.back();
                deliver_result(sub->session_id, PipelineFailed{submission_id, r.reason, r.code}, submission_id);
                return;
            }
            try {
                run_stage(*sub, *a);
            } catch (const StageFailure& f) {
                fail(*sub, a, f);
            } catch (const SimulatedCrash&) {
                throw;
            } catch (const std::exception& e) {
                log_error("submission " + submission_id + ": " + e.what());
                fail(*sub, a, {"internal", {}});
            }
        }
    }

    void worker_loop() {
        while (auto id = queue.pop()) {
            if (!stopping && !crashed) {
                try {
                    process(*id);
                } catch (const SimulatedCrash&) {
                    crashed = true;
                } catch (const std::exception& e) {
                    log_error("worker: " + std::string(e.what()));
                }
            }
            {
                std::lock_guard lock(idle_mutex);
                --in_flight;
            }
            idle_cv.notify_all();
        }
    }

    void enqueue_forced(const std::string& submission_id) {
        {
            std::lock_guard lock(idle_mutex);
            ++in_flight;
        }
        queue.force_push(submission_id);
    }

    bool try_enqueue(const std::string& submission_id) {
        {
            std::lock_guard lock(idle_mutex);
            ++in_flight;
        }
        if (queue.try_push(submission_id)) return true;
        {
            std::lock_guard lock(idle_mutex);
            --in_flight;
        }
        idle_cv.notify_all();
        return false;
    }

    // ---------------------------------------------------- recovery

    void recover() {
        for (auto& s : sessions.load_all()) {
            auto slot = std::make_shared<SessionSlot>();
            slot->session = std::move(s);
            slots[slot->session.session_id] = slot;
        }
        std::set<std::string> known;
        for (const auto& sub : submissions.load_all()) {
            known.insert(sub.submission_id);
            auto slot = slot_for(sub.session_id);
            bool awaited = slot && slot->session.state == DialogState::Processing &&
                           slot->session.current_submission == sub.submission_id;
            if (!awaited && !is_terminal(sub.status())) {
                // the upload was journaled but the session never moved on
                submissions.advance(sub.submission_id,
                                    {SubmissionStatus::Failed, utc_now(), {}, {}, {}, "abandoned", "abandoned"});
                continue;
            }
            if (awaited) enqueue_forced(sub.submission_id);
        }
        for (auto& [id, slot] : slots) {
            if (slot->session.state == DialogState::Processing && !known.count(slot->session.current_submission)) {
                const Assignment& a = owner.assignment(slot->session.assignment_id);
                DialogEvent ev = PipelineFailed{slot->session.current_submission,
                                                scripts.at(a.language).failure_reason("internal"), "lost"};
                commit(*slot, handle_event(slot->session, ev, context_for(slot->session), utc_now()));
            }
        }
    }

    void stop() {
        if (stopping.exchange(true)) return;
        queue.close();
        for (auto& w : workers) {
            if (w.joinable()) w.join();
        }
        {
            std::lock_guard lock(pending_mutex);
            pending.clear();
        }
        if (bot_consumer.joinable()) bot_consumer.join();
        if (feedback_consumer.joinable()) feedback_consumer.join();
        for (auto& l : listeners) l->stop();
    }
};

BotService::BotService(ServiceConfig config, ServiceHooks hooks) : config_(std::move(config)) {
    if (config_.data_dir.empty()) throw Error(ErrorCode::ConfigError, "data_dir is not set");
    if (config_.assignments.empty()) throw Error(ErrorCode::ConfigError, "no assignments configured");
    std::filesystem::create_directories(config_.data_dir);
    for (const auto& ac : config_.assignments) {
        for (const auto& existing : assignments_) {
            if (existing.assignment_id == ac.assignment_id) {
                throw Error(ErrorCode::ConfigError, "duplicate assignment id " + ac.assignment_id);
            }
        }
        assignments_.push_back(build_assignment(ac, config_.resource_dir, config_.graph));
    }
    impl_ = std::make_unique<Impl>(*this, config_, std::move(hooks));
    try {
        for (const auto& a : assignments_) {
            if (!impl_->resources.count(a.language)) {
                impl_->resources.emplace(a.language, LanguageResources::load(config_.resource_dir, a.language));
                impl_->scripts.emplace(a.language, DialogScript::load(config_.resource_dir / "dialog", a.language));
            }
        }
        if (!impl_->scripts.count(Language::EN)) {
            impl_->scripts.emplace(Language::EN, DialogScript::load(config_.resource_dir / "dialog", Language::EN));
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    impl_->start_network();
    try {
        impl_->recover();
    } catch (...) {
        impl_->stop();
        throw;
    }
    for (std::size_t i = 0; i < config_.workers; ++i) {
        impl_->workers.emplace_back([this] { impl_->worker_loop(); });
    }
}

BotService::~BotService() { stop(); }

void BotService::stop() {
    if (impl_) impl_->stop();
}

bool BotService::crashed() const noexcept { return impl_->crashed; }

const Assignment& BotService::assignment(const std::string& assignment_id) const {
    for (const auto& a : assignments_) {
        if (a.assignment_id == assignment_id) return a;
    }
    throw Error(ErrorCode::NotFound, "no such assignment: " + assignment_id);
}

DialogSession BotService::create_session(const std::string& subject, const std::string& assignment_id) {
    const Assignment& a = assignment_id.empty() ? assignments_.front() : assignment(assignment_id);
    DialogSession s;
    s.session_id = random_id(16);
    s.student_id = subject;
    s.assignment_id = a.assignment_id;
    s.language = a.language;
    impl_->sessions.create(s);
    auto slot = std::make_shared<SessionSlot>();
    slot->session = s;
    std::lock_guard lock(impl_->slots_mutex);
    impl_->slots[s.session_id] = slot;
    return s;
}

EventResult BotService::post_message(const std::string& subject, const std::string& session_id,
                                     const std::string& text) {
    auto slot = impl_->owned_slot(subject, session_id);
    std::lock_guard lock(slot->mutex);
    if (slot->deleted) throw Error(ErrorCode::NotFound, "no such session");
    DialogOutcome outcome =
        handle_event(slot->session, UserMessage{text}, impl_->context_for(slot->session), utc_now());
    impl_->commit(*slot, outcome);
    return {slot->session, outcome.replies, false, {}};
}

EventResult BotService::upload(const std::string& subject, const std::string& session_id,
                               const std::string& file_name, const std::string& content) {
    if (content.empty()) throw Error(ErrorCode::InvalidArgument, "uploaded file is empty");
    if (content.size() > config_.max_upload_bytes) {
        throw Error(ErrorCode::InvalidArgument,
                    "uploaded file exceeds " + std::to_string(config_.max_upload_bytes) + " bytes");
    }
    auto slot = impl_->owned_slot(subject, session_id);
    std::lock_guard lock(slot->mutex);
    if (slot->deleted) throw Error(ErrorCode::NotFound, "no such session");
    DialogSession& s = slot->session;
    DialogContext ctx = impl_->context_for(s);
    std::string name = file_name.empty() ? "upload.txt" : file_name;
    std::string now = utc_now();

    UserUpload event{name, random_id(16)};
    DialogOutcome outcome = handle_event(s, event, ctx, now);
    if (!outcome.enqueue_submission) {
        impl_->commit(*slot, outcome);
        return {s, outcome.replies, false, {}};
    }
    Submission sub;
    sub.submission_id = event.submission_id;
    sub.session_id = s.session_id;
    sub.student_id = s.student_id;
    sub.assignment_id = s.assignment_id;
    sub.file_name = name;
    sub.received_at = now;
    std::string raw_blob = impl_->write_private(content);
    sub.log.push_back(stage_record(SubmissionStatus::Received, raw_blob));
    sub.log.back().at = now;
    impl_->submissions.create(sub);
    if (!impl_->try_enqueue(sub.submission_id)) {
        impl_->submissions.remove(sub.submission_id);
        impl_->blobs.remove(raw_blob);
        DialogOutcome busy = reject_busy(s, event, ctx, now);
        impl_->commit(*slot, busy);
        return {s, busy.replies, true, {}};
    }
    impl_->commit(*slot, outcome);
    return {s, outcome.replies, false, sub.submission_id};
}

DialogSession BotService::get_session(const std::string& subject, const std::string& session_id) {
    auto slot = impl_->owned_slot(subject, session_id);
    std::lock_guard lock(slot->mutex);
    if (slot->deleted) throw Error(ErrorCode::NotFound, "no such session");
    return slot->session;
}

std::string BotService::get_document(const std::string& subject, const std::string& document_id, bool pdf) {
    auto record = impl_->documents.get(document_id);
    if (!record) throw Error(ErrorCode::NotFound, "no such document");
    if (record->owner != subject) throw Error(ErrorCode::Forbidden, "document belongs to another user");
    if (pdf) {
        if (record->pdf_blob.empty()) throw Error(ErrorCode::NotFound, "no PDF rendition for this document");
        return to_string(impl_->read_private(record->pdf_blob));
    }
    return to_string(impl_->read_private(record->blob));
}

void BotService::delete_session(const std::string& subject, const std::string& session_id) {
    auto slot = impl_->owned_slot(subject, session_id);
    {
        std::lock_guard lock(slot->mutex);
        slot->deleted = true;
        for (const auto& sub : impl_->submissions.load_all()) {
            if (sub.session_id != session_id) continue;
            for (const auto& r : sub.log) {
                if (!r.blob.empty()) impl_->blobs.remove(r.blob);
                if (!r.extra_blob.empty()) impl_->blobs.remove(r.extra_blob);
            }
            impl_->submissions.remove(sub.submission_id);
        }
        for (const auto& doc : impl_->documents.for_session(session_id)) {
            impl_->blobs.remove(doc.blob);
            if (!doc.pdf_blob.empty()) impl_->blobs.remove(doc.pdf_blob);
            impl_->documents.remove(doc.document_id);
        }
        impl_->sessions.remove(session_id);
    }
    std::lock_guard lock(impl_->slots_mutex);
    impl_->slots.erase(session_id);
}

std::optional<Submission> BotService::submission(const std::string& submission_id) const {
    return impl_->submissions.load(submission_id);
}

bool BotService::wait_until_idle(std::chrono::milliseconds timeout) {
    std::unique_lock lock(impl_->idle_mutex);
    return impl_->idle_cv.wait_for(lock, timeout, [&] { return impl_->in_flight == 0; });
}

void BotService::set_feedback_node_online(bool online) {
    if (!impl_->in_process) throw Error(ErrorCode::InvalidArgument, "only supported with the in-process transport");
    impl_->in_process->set_offline(kFeedbackNode, !online);
}

}  // namespace teccobot
