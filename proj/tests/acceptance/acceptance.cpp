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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <httplib.h>
#include <sys/wait.h>

#include <algorithm>
#include <condition_variable>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "service_support.hpp"
#include "teccobot/dialog.hpp"
#include "teccobot/error.hpp"
#include "teccobot/feedback_engine.hpp"
#include "teccobot/graph_compare.hpp"
#include "teccobot/http_api.hpp"
#include "teccobot/relay_network.hpp"
#include "teccobot/text_pipeline.hpp"

namespace fs = std::filesystem;
using namespace teccobot;
using namespace std::chrono_literals;
using testing::read_file;
using testing::ScratchDir;

namespace {

/// Thrown by a check to report why it failed.
struct Failed {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw Failed{why};
}

int run_cli(const std::vector<std::string>& args, const fs::path& log) {
    std::string command = "'" + std::string(TECCOBOT_CLI) + "'";
    for (const auto& a : args) command += " '" + a + "'";
    command += " >'" + log.string() + "' 2>&1";
    int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path sample(const std::string& name) { return testing::resource_dir() / "samples" / name; }

std::size_t words_in(const fs::path& p, Language lang) {
    return clean_text(RawSubmissionText(read_file(p), lang, "sample"), 0).word_count;
}

// ------------------------------------------------------------------ 1

void pipeline_end_to_end() {
    require(words_in(sample("reference_en.txt"), Language::EN) >= 500, "reference sample under 500 words");
    require(words_in(sample("student_en.txt"), Language::EN) >= 300, "student sample under 300 words");
    ScratchDir dir;
    auto started = std::chrono::steady_clock::now();
    int code = run_cli({"demo", "--out", (dir.path() / "demo.html").string()}, dir.path() / "demo.log");
    auto elapsed = std::chrono::steady_clock::now() - started;
    require(code == 0, "demo exited with " + std::to_string(code) + ": " + read_file(dir.path() / "demo.log"));
    require(elapsed < 10s, "demo took " +
                               std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count()) +
                               " ms");
    std::string html = read_file(dir.path() / "demo.html");
    extract_rendered_body(html);
    auto footer = nlohmann::json::parse(extract_report_json(html));
    require(footer["measures"].size() == 6, "document does not carry six measures");
    for (const auto& [name, m] : footer["measures"].items()) {
        auto num = m.at("num").get<std::uint64_t>();
        auto den = m.at("den").get<std::uint64_t>();
        require(den > 0 && num <= den, name + " outside [0,1]");
    }
    require(!footer["shared_concepts"].empty(), "no shared concepts");
}

// ------------------------------------------------------------------ 2

void determinism() {
    ScratchDir dir;
    auto at = [&](const std::string& n) { return (dir.path() / n).string(); };
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 3; ++rep) {
        std::string r = std::to_string(rep);
        std::vector<std::vector<std::string>> commands = {
            {"refgraph", "--input", sample("reference_en.txt").string(), "--out", at("ref" + r + ".json")},
            {"refgraph", "--input", sample("student_en.txt").string(), "--out", at("stu" + r + ".json")},
            {"compare", "--student", at("stu" + r + ".json"), "--reference", at("ref" + r + ".json"), "--out",
             at("rep" + r + ".json")},
            {"feedback", "--report", at("rep" + r + ".json"), "--student-graph", at("stu" + r + ".json"),
             "--reference-graph", at("ref" + r + ".json"), "--mode", "comparison", "--template", "comparison",
             "--out", at("doc" + r + ".html")},
        };
        for (const auto& c : commands) require(run_cli(c, dir.path() / "log") == 0, c[0] + " failed");
        std::map<std::string, std::string> outputs = {
            {"reference graph", read_file(at("ref" + r + ".json"))},
            {"student graph", read_file(at("stu" + r + ".json"))},
            {"report", read_file(at("rep" + r + ".json"))},
            {"document body", extract_rendered_body(read_file(at("doc" + r + ".html")))},
        };
        if (rep == 0) {
            first = outputs;
            continue;
        }
        for (const auto& [name, bytes] : outputs) require(bytes == first[name], name + " differs on repetition");
    }
}

// ------------------------------------------------------------------ 3

void measure_identities() {
    std::mt19937 rng(2026);
    std::vector<ConceptGraph> graphs;
    for (int i = 0; i < 200; ++i) graphs.push_back(testing::random_connected_graph(rng, 12));
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        require(graphs[i].vertices.size() <= 12, "generator exceeded 12 vertices");
        for (const auto& [name, value] : compare(graphs[i], graphs[i]).measures.items()) {
            require(value == Ratio::one(), std::string(name) + "(G,G) != 1 for graph " + std::to_string(i));
        }
        const ConceptGraph& other = graphs[(i + 1) % graphs.size()];
        Measures ab = compare(graphs[i], other).measures;
        Measures ba = compare(other, graphs[i]).measures;
        for (const auto& [name, value] : ab.items()) {
            require(value.num() <= value.den(), std::string(name) + " above 1");
            require(value == ba.get(name), std::string(name) + " not symmetric");
        }
    }
}

// ------------------------------------------------------------------ 4

void oracle_equivalence() {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        auto corpus = testing::random_corpus(rng, 6, 10);
        auto m = build_association_matrix(corpus);
        auto oracle = testing::brute_force_matrix(corpus);
        require(m.terms == oracle.terms && m.term_freq == oracle.freq, "term list differs on corpus " +
                                                                          std::to_string(trial));
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t j = 0; j < m.size(); ++j) {
                require(m.count(i, j) == oracle.counts[i][j], "count differs on corpus " + std::to_string(trial));
            }
        }
    }
    for (int trial = 0; trial < 100; ++trial) {
        ConceptGraph a = testing::random_connected_graph(rng, 8);
        ConceptGraph b = testing::random_connected_graph(rng, 8);
        auto [cn, cd] = testing::brute_force_jaccard(a.labels(), b.labels());
        require(concept_match(a, b) == Ratio(cn, cd), "concept_match differs on pair " + std::to_string(trial));
        auto [pn, pd] = testing::brute_force_jaccard(testing::edge_pairs(a), testing::edge_pairs(b));
        require(propositional_match(a, b) == Ratio(pn, pd),
                "propositional_match differs on pair " + std::to_string(trial));
        require(diameter(a) == testing::brute_force_diameter(a) && diameter(b) == testing::brute_force_diameter(b),
                "diameter differs on pair " + std::to_string(trial));
    }
}

// ------------------------------------------------------------------ 5

void graph_invariants() {
    std::mt19937 rng(5150);
    GraphParams params{8, 12};
    int built = 0;
    for (int trial = 0; trial < 300 && built < 50; ++trial) {
        auto corpus = testing::random_corpus(rng, 8, 16);
        ConceptGraph g;
        try {
            g = build_concept_graph(corpus, params, "src", "stop");
        } catch (const Error& e) {
            if (e.code() == ErrorCode::EmptyConcepts) continue;
            throw;
        }
        ++built;
        require(is_connected(g), "graph not connected");
        require(g.vertices.size() <= params.max_concepts, "too many vertices");
        auto shuffled = corpus;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        require(build_concept_graph(shuffled, params, "src", "stop") == g, "sentence order changed the graph");
    }
    require(built == 50, "only " + std::to_string(built) + " corpora produced graphs");

    for (auto [file, lang] : {std::pair{"reference_en.txt", Language::EN}, std::pair{"student_en.txt", Language::EN},
                              std::pair{"reference_de.txt", Language::DE}, std::pair{"student_de.txt", Language::DE}}) {
        auto res = LanguageResources::load(testing::resource_dir(), lang);
        auto sentences = analyze_text(RawSubmissionText(read_file(sample(file)), lang, file), res, 0);
        ConceptGraph g = build_concept_graph(sentences, {}, file, res.stopwords.content_hash());
        require(is_connected(g) && g.vertices.size() <= 25, std::string(file) + " graph breaks invariants");
        std::shuffle(sentences.begin(), sentences.end(), rng);
        require(build_concept_graph(sentences, {}, file, res.stopwords.content_hash()) == g,
                std::string(file) + " graph depends on sentence order");
    }
}

// ------------------------------------------------------------------ 6

Bytes random_bytes_from(std::mt19937& rng, std::size_t max_size) {
    std::uniform_int_distribution<std::size_t> size(0, max_size);
    std::uniform_int_distribution<int> byte(0, 255);
    Bytes out(size(rng));
    for (auto& b : out) b = static_cast<std::uint8_t>(byte(rng));
    return out;
}

bool contains(const Bytes& haystack, const Bytes& needle) {
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

void relay_security() {
    Registry registry;
    NodeKeys bot_keys = generate_identity(registry, "chat-front");
    NodeKeys service_keys = generate_identity(registry, "feedback-service");
    generate_identity(registry, "relay");
    InProcessTransport transport;
    RelayNode service(service_keys, registry);
    transport.attach("feedback-service", service.handler());
    RelayHop relay(registry, transport, {}, true);
    transport.attach("relay", [&](const Bytes& f) { relay.on_frame(f); });
    Router router(registry, transport, {}, "relay");
    std::mt19937 rng(1000);

    for (int i = 0; i < 1000; ++i) {
        Bytes payload = random_bytes_from(rng, 4096);
        router.route(seal(bot_keys, registry, "feedback-service", payload));
        auto got = service.inbox().pop_for(1s);
        require(got.has_value(), "envelope " + std::to_string(i) + " not delivered");
        require(service.open(*got) == payload, "payload " + std::to_string(i) + " changed in transit");
    }

    std::size_t accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        Bytes wire = encode_envelope(seal(bot_keys, registry, "feedback-service", random_bytes_from(rng, 512)));
        std::uniform_int_distribution<std::size_t> bit(0, wire.size() * 8 - 1);
        std::size_t b = bit(rng);
        wire[b / 8] ^= static_cast<std::uint8_t>(1u << (b % 8));
        try {
            open(service_keys, registry, decode_envelope(wire));
            ++accepted;
        } catch (const Error&) {
        }
    }
    require(accepted == 0, std::to_string(accepted) + " mutated envelopes were accepted");

    RelayHop watched(registry, transport, {}, true);
    transport.attach("relay", [&](const Bytes& f) { watched.on_frame(f); });
    std::vector<Bytes> markers;
    for (int i = 0; i < 100; ++i) {
        Bytes p = to_bytes("student text " + std::to_string(i) + ": plants convert light into chemical energy");
        Bytes tail = random_bytes_from(rng, 256);
        p.insert(p.end(), tail.begin(), tail.end());
        markers.emplace_back(p.begin(), p.begin() + 24);
        router.route(seal(bot_keys, registry, "feedback-service", p));
        service.inbox().pop_for(1s);
    }
    auto buffers = watched.captured();
    require(buffers.size() == 100, "relay saw " + std::to_string(buffers.size()) + " frames");
    for (const auto& buf : buffers) {
        for (const auto& m : markers) require(!contains(buf, m), "plaintext visible at the relay");
    }
}

// ------------------------------------------------------------------ 7

using St = SubmissionStatus;
using DS = DialogState;

void fsm_random_driving() {
    const std::set<std::string> names = {"greeting", "task_offered", "awaiting_submission", "processing",
                                         "feedback_delivered", "closed"};
    DialogScript script = DialogScript::load(testing::resource_dir() / "dialog", Language::EN);
    DialogContext ctx{script, "Task", "Prompt"};
    std::mt19937 rng(10000);
    std::uniform_int_distribution<int> kind(0, 7);
    int events = 0;
    int submission = 0;
    for (int session = 0; session < 100; ++session) {
        DialogSession s;
        s.session_id = "s" + std::to_string(session);
        for (int step = 0; step < 100; ++step, ++events) {
            if (s.state == DS::Closed) {
                bool rejected = false;
                try {
                    handle_event(s, UserMessage{"hello"}, ctx, "t");
                } catch (const Error& e) {
                    rejected = e.code() == ErrorCode::SessionClosed;
                }
                require(rejected, "closed session accepted an event");
                s = DialogSession{};
                s.session_id = "s" + std::to_string(session) + "-" + std::to_string(step);
                continue;
            }
            DialogEvent ev;
            DS want = s.state;
            switch (kind(rng)) {
                case 0:
                    ev = UserMessage{"hello"};
                    if (s.state == DS::Greeting) want = DS::TaskOffered;
                    break;
                case 1:
                    ev = UserMessage{"start"};
                    if (s.state == DS::Greeting) want = DS::TaskOffered;
                    if (s.state == DS::TaskOffered) want = DS::AwaitingSubmission;
                    break;
                case 2:
                    ev = UserMessage{"done"};
                    if (s.state == DS::Greeting) want = DS::TaskOffered;
                    if (s.state == DS::FeedbackDelivered) want = DS::Closed;
                    break;
                case 3:
                    ev = UserUpload{"f.txt", "sub" + std::to_string(++submission)};
                    if (s.state == DS::AwaitingSubmission || s.state == DS::FeedbackDelivered) want = DS::Processing;
                    break;
                case 4:
                    ev = PipelineDone{s.current_submission, "doc", "summary"};
                    if (s.state == DS::Processing) want = DS::FeedbackDelivered;
                    break;
                case 5:
                    ev = PipelineFailed{s.current_submission, "reason", "internal"};
                    if (s.state == DS::Processing) want = DS::AwaitingSubmission;
                    break;
                case 6:
                    ev = PipelineDone{"stale", "doc", "summary"};
                    break;
                default:
                    ev = PipelineFailed{"stale", "reason", "internal"};
                    break;
            }
            DialogOutcome out = handle_event(s, ev, ctx, "t");
            require(names.count(std::string(to_string(out.session.state))) == 1, "unnamed state reached");
            require(out.session.state == want, std::string("off-table transition from ") +
                                                   std::string(to_string(s.state)) + " to " +
                                                   std::string(to_string(out.session.state)));
            require(out.session.history.size() == s.history.size() + out.appended.size(), "history entry lost");
            s = out.session;
        }
    }
    require(events == 10000, "drove " + std::to_string(events) + " events");
}

bool monotonic(const std::vector<St>& seq) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (!is_valid_advance(seq[i - 1], seq[i])) return false;
    }
    return true;
}

void status_never_regresses() {
    ScratchDir dir;
    IssuerKeys issuer = IssuerKeys::generate();
    ServiceConfig config = testing::service_config(dir.path(), issuer);
    config.queue_depth = 64;
    config.workers = 4;
    std::mutex m;
    std::map<std::string, std::vector<St>> seen;
    ServiceHooks hooks;
    hooks.after_stage = [&](const std::string& id, St s) {
        std::lock_guard lock(m);
        if (s != St::Received) seen[id].push_back(s);
    };
    BotService service(config, hooks);
    std::string text = testing::student_text_en();
    std::vector<std::string> ids;
    for (int i = 0; i < 12; ++i) {
        std::string subject = "student" + std::to_string(i);
        DialogSession s = testing::ready_session(service, subject);
        std::string content = i % 4 == 3 ? std::string("far too short") : text;
        ids.push_back(service.upload(subject, s.session_id, "f.txt", content).submission_id);
    }
    require(service.wait_until_idle(30s), "pipeline did not drain");
    for (const auto& id : ids) {
        auto sub = service.submission(id);
        require(sub.has_value(), "submission lost");
        std::vector<St> journaled;
        for (const auto& r : sub->log) journaled.push_back(r.status);
        require(monotonic(journaled), "journaled status regressed");
        std::vector<St> observed = {St::Received};
        observed.insert(observed.end(), seen[id].begin(), seen[id].end());
        require(observed == journaled, "observed statuses differ from the journal");
        require(is_terminal(sub->status()), "submission not finished");
    }
}

void kill_and_restart() {
    struct Case {
        St crash_at;
        bool short_text;
        DS expected;
    };
    const std::vector<Case> cases = {
        {St::Received, false, DS::FeedbackDelivered},   {St::Cleaned, false, DS::FeedbackDelivered},
        {St::GraphBuilt, false, DS::FeedbackDelivered}, {St::Compared, false, DS::FeedbackDelivered},
        {St::FeedbackReady, false, DS::FeedbackDelivered}, {St::Failed, true, DS::AwaitingSubmission},
    };
    for (const auto& c : cases) {
        ScratchDir dir;
        IssuerKeys issuer = IssuerKeys::generate();
        ServiceConfig config = testing::service_config(dir.path(), issuer);
        std::string sid, sub_id;
        {
            ServiceHooks hooks;
            hooks.after_stage = [&](const std::string&, St s) {
                if (s == c.crash_at) throw SimulatedCrash("kill");
            };
            BotService service(config, hooks);
            sid = testing::ready_session(service, "alice").session_id;
            sub_id = service
                         .upload("alice", sid, "f.txt", c.short_text ? std::string("too short") : testing::student_text_en())
                         .submission_id;
            service.wait_until_idle(30s);
            require(service.crashed(), "no crash at " + std::string(to_string(c.crash_at)));
        }
        BotService service(config);
        DialogSession s = testing::wait_for_state(service, "alice", sid, c.expected);
        std::string stage(to_string(c.crash_at));
        require(s.state == c.expected, "after a kill at " + stage + " the session is " +
                                           std::string(to_string(s.state)));
        service.wait_until_idle(10s);
        auto sub = service.submission(sub_id);
        std::vector<St> journaled;
        for (const auto& r : sub->log) journaled.push_back(r.status);
        require(monotonic(journaled) && is_terminal(sub->status()), "bad status log after a kill at " + stage);
        std::size_t terminal = std::count_if(journaled.begin(), journaled.end(), [](St x) { return is_terminal(x); });
        require(terminal == 1, "submission finished twice after a kill at " + stage);
    }
}

void dialog_fsm() {
    fsm_random_driving();
    status_never_regresses();
    kill_and_restart();
}

// ------------------------------------------------------------------ 8

void api_authorization() {
    ScratchDir dir;
    IssuerKeys issuer = IssuerKeys::generate();
    IssuerKeys wrong = IssuerKeys::generate();
    BotService service(testing::service_config(dir.path(), issuer));
    HttpApi api(service);
    httplib::Client client("127.0.0.1", api.start("127.0.0.1", 0));
    auto bearer = [](const std::string& token) { return httplib::Headers{{"Authorization", "Bearer " + token}}; };
    httplib::Headers owner = bearer(testing::bearer(issuer, "alice"));

    DialogSession s = testing::ready_session(service, "alice");
    service.upload("alice", s.session_id, "f.txt", testing::student_text_en());
    s = testing::wait_for_state(service, "alice", s.session_id, DS::FeedbackDelivered);
    require(s.state == DS::FeedbackDelivered, "setup conversation did not finish");
    std::string doc = s.history.back().document_id;
    std::string sess = "/sessions/" + s.session_id;

    struct Endpoint {
        std::string name;
        std::function<httplib::Result(const httplib::Headers&)> call;
        bool owned;  // scoped to alice's session or document
    };
    std::string json_body = R"({"text":"hello"})";
    std::vector<Endpoint> endpoints = {
        {"POST /sessions", [&](const auto& h) { return client.Post("/sessions", h, "", "application/json"); }, false},
        {"POST /sessions/{id}/messages",
         [&](const auto& h) { return client.Post(sess + "/messages", h, json_body, "application/json"); }, true},
        {"POST /sessions/{id}/upload",
         [&](const auto& h) {
             httplib::MultipartFormDataItems items = {{"file", "some text", "f.txt", "text/plain"}};
             return client.Post(sess + "/upload", h, items);
         },
         true},
        {"GET /sessions/{id}", [&](const auto& h) { return client.Get(sess, h); }, true},
        {"DELETE /sessions/{id}", [&](const auto& h) { return client.Delete(sess, h); }, true},
        {"GET /documents/{id}", [&](const auto& h) { return client.Get("/documents/" + doc, h); }, true},
        {"GET /assignments", [&](const auto& h) { return client.Get("/assignments", h); }, false},
    };
    struct Credential {
        std::string name;
        httplib::Headers headers;
    };
    std::vector<Credential> credentials = {
        {"no token", {}},
        {"expired", bearer(issue_token(issuer, "alice", std::chrono::system_clock::now() - 1s))},
        {"wrong key", bearer(testing::bearer(wrong, "alice"))},
        {"foreign session", bearer(testing::bearer(issuer, "mallory"))},
    };
    for (const auto& e : endpoints) {
        for (const auto& c : credentials) {
            int want = c.name == "foreign session" ? (e.owned ? 403 : (e.name == "POST /sessions" ? 201 : 200)) : 401;
            auto res = e.call(c.headers);
            require(static_cast<bool>(res), e.name + " with " + c.name + ": no response");
            require(res->status == want, e.name + " with " + c.name + " returned " + std::to_string(res->status) +
                                             ", expected " + std::to_string(want));
            if (want >= 400) {
                auto body = nlohmann::json::parse(res->body);
                require(body.contains("code") && body.contains("message"), e.name + ": error body lacks code");
            }
        }
    }
    auto still_there = client.Get(sess, owner);
    require(still_there && still_there->status == 200, "owner lost access to the session");
    auto health = client.Get("/health");
    require(health && health->status == 200, "health endpoint needs a token");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
        {"pipeline end-to-end (demo, six measures, shared concepts, < 10 s)", pipeline_end_to_end},
        {"determinism (refgraph/compare/feedback x3)", determinism},
        {"measure identities (200 graphs)", measure_identities},
        {"oracle equivalence (100 corpora, 100 graph pairs)", oracle_equivalence},
        {"graph invariants (connected, bounded, 50 shuffles)", graph_invariants},
        {"relay security (1000 round trips, 1000 bit flips, 100 relayed payloads)", relay_security},
        {"dialog FSM (10000 events, monotonic status, kill and restart)", dialog_fsm},
        {"API authorization matrix", api_authorization},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        std::string why;
        try {
            check();
        } catch (const Failed& f) {
            why = f.why;
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        if (why.empty()) {
            std::cout << "PASS " << name << std::endl;
        } else {
            std::cout << "FAIL " << name << ": " << why << std::endl;
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
