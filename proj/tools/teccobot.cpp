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

// teccobot: operator command line.
//
//   teccobot refgraph --input TEXT --language en --out GRAPH.json
//   teccobot compare  --student GRAPH.json --reference GRAPH.json --out REPORT.json
//   teccobot feedback --report REPORT.json --student-graph G --reference-graph G
//                     --template comparison --mode comparison --language en --out DOC.html
//   teccobot serve    --config CONFIG.json
//   teccobot demo     [--out DOC.html]
//   teccobot keygen   --out ISSUER.key
//   teccobot token    --key ISSUER.key --subject NAME [--ttl-hours N]
//
// Exit status: 0 success, 1 usage error, 2 processing error.

#include <CLI11.hpp>
#include <httplib.h>
#include <signal.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "teccobot/auth.hpp"
#include "teccobot/bot_service.hpp"
#include "teccobot/error.hpp"
#include "teccobot/feedback_engine.hpp"
#include "teccobot/graph_builder.hpp"
#include "teccobot/graph_compare.hpp"
#include "teccobot/http_api.hpp"
#include "teccobot/text_pipeline.hpp"

namespace fs = std::filesystem;
using namespace teccobot;

namespace {

constexpr int kUsage = 1;
constexpr int kFailed = 2;

std::string read_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const fs::path& path, const std::string& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

/// Runs `f`, prefixing any error with the stage name.
template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), name + ": " + e.what());
    }
}

ConceptGraph load_graph(const fs::path& path) {
    return stage(path.string(), [&] { return concept_graph_from_json(read_input(path)); });
}

// ---------------------------------------------------------------- refgraph

struct RefgraphArgs {
    fs::path input, out, resource_dir = TECCOBOT_RESOURCE_DIR;
    std::string language = "en";
    GraphParams params;
    std::size_t min_words = 0;
};

int run_refgraph(const RefgraphArgs& a) {
    Language lang = parse_language(a.language);
    std::string text = read_input(a.input);
    LanguageResources res = stage("resources", [&] { return LanguageResources::load(a.resource_dir, lang); });
    CleanText clean = stage("clean", [&] {
        return clean_text(RawSubmissionText(text, lang, a.input.stem().string()), a.min_words);
    });
    std::vector<TokenizedSentence> sentences = stage("tokenize", [&] {
        std::vector<TokenizedSentence> out;
        for (const auto& s : segment_sentences(clean, res.abbreviations)) {
            out.push_back(tokenize_normalize(s, lang, res.stopwords));
        }
        return out;
    });
    ConceptGraph g = stage("graph", [&] {
        return build_concept_graph(sentences, a.params, a.input.stem().string(), res.stopwords.content_hash());
    });
    write_output(a.out, to_canonical_json(g));
    std::cout << a.out.string() << ": " << g.vertices.size() << " vertices, " << g.edges.size() << " edges\n";
    return 0;
}

// ---------------------------------------------------------------- compare

int run_compare(const fs::path& student, const fs::path& reference, const fs::path& out) {
    ComparisonReport report = compare(load_graph(student), load_graph(reference));
    write_output(out, to_canonical_json(report));
    std::cout << std::left << std::setw(22) << "measure" << "value\n";
    for (const auto& [name, value] : report.measures.items()) {
        std::cout << std::left << std::setw(22) << name << format_measure(value) << "\n";
    }
    std::cout << "shared concepts: " << report.shared_concepts.size() << "\n";
    return 0;
}

// ---------------------------------------------------------------- feedback

struct FeedbackArgs {
    fs::path report, student_graph, reference_graph, out, resource_dir = TECCOBOT_RESOURCE_DIR;
    std::string template_name = "comparison", mode = "comparison", language = "en";
    std::string document_id, created_at;
};

int run_feedback(const FeedbackArgs& a) {
    Language lang = parse_language(a.language);
    FeedbackMode mode = parse_feedback_mode(a.mode);
    ComparisonReport report =
        stage(a.report.string(), [&] { return comparison_report_from_json(read_input(a.report)); });
    ConceptGraph student = load_graph(a.student_graph);
    ConceptGraph reference = load_graph(a.reference_graph);
    FeedbackTemplate t = stage("template", [&] {
        fs::path as_path(a.template_name);
        if (as_path.extension() == ".html") {
            return FeedbackTemplate::parse(as_path.stem().string(), lang, read_input(as_path));
        }
        return FeedbackTemplate::load(a.resource_dir / "templates", a.template_name, lang);
    });
    FeedbackDocument doc = stage("fill", [&] {
        return fill_template(t, report, mode, student, reference, {a.document_id, a.created_at});
    });
    write_output(a.out, export_document(doc));
    std::cout << a.out.string() << ": document " << doc.document_id << ", " << doc.attachments.size()
              << " attachments\n";
    return 0;
}

// ---------------------------------------------------------------- serve

int run_serve(const fs::path& config_path) {
    ServiceConfig config = ServiceConfig::load(config_path);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    BotService service(config);
    HttpApi api(service);
    std::uint16_t port = api.start(config.host, config.port);
    std::cout << "listening on http://" << config.host << ":" << port << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "shutting down" << std::endl;
    api.stop();
    service.stop();
    return 0;
}

// ---------------------------------------------------------------- demo

struct DemoArgs {
    fs::path out = "teccobot-demo.html";
    fs::path data_dir;
    fs::path resource_dir = TECCOBOT_RESOURCE_DIR;
    std::string transport = "in_process";
};

nlohmann::json checked(const httplib::Result& res, int want, const std::string& what) {
    if (!res) throw Error(ErrorCode::IoError, what + ": " + httplib::to_string(res.error()));
    if (res->status != want) {
        throw Error(ErrorCode::IoError, what + ": HTTP " + std::to_string(res->status) + " " + res->body);
    }
    return res->body.empty() ? nlohmann::json() : nlohmann::json::parse(res->body);
}

void print_replies(const nlohmann::json& body) {
    for (const auto& r : body["replies"]) std::cout << "  bot:     " << r["text"].get<std::string>() << "\n";
}

int run_demo(const DemoArgs& a) {
    auto started = std::chrono::steady_clock::now();
    bool scratch = a.data_dir.empty();
    fs::path data_dir = scratch ? fs::temp_directory_path() / ("teccobot-demo-" + random_id(8)) : a.data_dir;
    IssuerKeys issuer = IssuerKeys::generate();

    ServiceConfig config;
    config.data_dir = data_dir;
    config.resource_dir = a.resource_dir;
    config.issuer_public_key = issuer.public_key;
    config.relay.transport = a.transport;
    AssignmentConfig assignment;
    assignment.assignment_id = "demo";
    assignment.title = "Photosynthesis";
    assignment.prompt = "Explain how plants turn light into chemical energy.";
    assignment.reference_text = "samples/reference_en.txt";
    config.assignments.push_back(assignment);
    std::string student_text = read_input(a.resource_dir / "samples" / "student_en.txt");

    int status = 0;
    {
        BotService service(config);
        HttpApi api(service);
        std::uint16_t port = api.start("127.0.0.1", 0);
        httplib::Client client("127.0.0.1", port);
        httplib::Headers auth = {
            {"Authorization",
             "Bearer " + issue_token(issuer, "demo-student", std::chrono::system_clock::now() + std::chrono::hours(1))}};
        std::cout << "service on http://127.0.0.1:" << port << " (data in " << data_dir.string() << ")\n";

        auto session = checked(client.Post("/sessions", auth, "", "application/json"), 201, "create session");
        std::string sid = session["session_id"];
        std::cout << "session " << sid << "\n";
        for (const char* text : {"hello", "start"}) {
            std::cout << "  student: " << text << "\n";
            print_replies(checked(client.Post("/sessions/" + sid + "/messages", auth,
                                              nlohmann::json{{"text", text}}.dump(), "application/json"),
                                  200, "message"));
        }
        std::cout << "  student: [uploads student_en.txt, " << count_words(student_text) << " words]\n";
        httplib::MultipartFormDataItems items = {{"file", student_text, "student_en.txt", "text/plain"}};
        print_replies(checked(client.Post("/sessions/" + sid + "/upload", auth, items), 200, "upload"));

        nlohmann::json state;
        auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
        do {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            state = checked(client.Get("/sessions/" + sid, auth), 200, "poll session");
        } while (state["state"] == "processing" && std::chrono::steady_clock::now() < deadline);
        const auto& last = state["history"].back();
        std::cout << "  bot:     " << last["text"].get<std::string>() << "\n";

        if (state["state"] != "feedback_delivered") {
            std::cerr << "teccobot: demo ended in state " << state["state"].get<std::string>() << "\n";
            status = kFailed;
        } else {
            std::string doc = last["document_id"];
            auto res = client.Get("/documents/" + doc, auth);
            if (!res || res->status != 200) throw Error(ErrorCode::IoError, "document download failed");
            write_output(a.out, res->body);
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            std::cout << "feedback document written to " << a.out.string() << " (" << elapsed.count() << " ms)\n";
        }
        api.stop();
        service.stop();
    }
    if (scratch) fs::remove_all(data_dir);
    return status;
}

// ---------------------------------------------------------------- keys

int run_keygen(const fs::path& out) {
    IssuerKeys keys = IssuerKeys::generate();
    write_output(out, to_hex(keys.secret_key) + "\n");
    fs::permissions(out, fs::perms::owner_read | fs::perms::owner_write);
    std::cout << "issuer_public_key " << to_hex(keys.public_key) << "\n";
    return 0;
}

int run_token(const fs::path& key_file, const std::string& subject, int ttl_hours) {
    std::string hex = read_input(key_file);
    while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.pop_back();
    IssuerKeys keys;
    keys.secret_key = from_hex(hex);
    if (keys.secret_key.size() != 64) throw Error(ErrorCode::InvalidArgument, "issuer key must be 64 bytes");
    keys.public_key.assign(keys.secret_key.begin() + 32, keys.secret_key.end());
    std::cout << issue_token(keys, subject, std::chrono::system_clock::now() + std::chrono::hours(ttl_hours)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TecCoBot concept-graph feedback tools"};
    app.require_subcommand(1);

    RefgraphArgs ref;
    auto* refgraph = app.add_subcommand("refgraph", "Build a concept graph from a text file");
    refgraph->add_option("--input", ref.input, "Plain text file")->required()->check(CLI::ExistingFile);
    refgraph->add_option("--language", ref.language, "en or de")->capture_default_str();
    refgraph->add_option("--out", ref.out, "Graph JSON to write")->required();
    refgraph->add_option("--max-concepts", ref.params.max_concepts)->capture_default_str();
    refgraph->add_option("--max-edges", ref.params.max_edges)->capture_default_str();
    refgraph->add_option("--min-words", ref.min_words)->capture_default_str();
    refgraph->add_option("--resource-dir", ref.resource_dir)->capture_default_str();

    fs::path cmp_student, cmp_reference, cmp_out;
    auto* cmp = app.add_subcommand("compare", "Compare a student graph with a reference graph");
    cmp->add_option("--student", cmp_student)->required()->check(CLI::ExistingFile);
    cmp->add_option("--reference", cmp_reference)->required()->check(CLI::ExistingFile);
    cmp->add_option("--out", cmp_out, "Report JSON to write")->required();

    FeedbackArgs fb;
    auto* feedback = app.add_subcommand("feedback", "Render a feedback document");
    feedback->add_option("--report", fb.report)->required()->check(CLI::ExistingFile);
    feedback->add_option("--student-graph", fb.student_graph)->required()->check(CLI::ExistingFile);
    feedback->add_option("--reference-graph", fb.reference_graph)->required()->check(CLI::ExistingFile);
    feedback->add_option("--template", fb.template_name, "Template id or .html file")->capture_default_str();
    feedback->add_option("--mode", fb.mode, "student_graph, reference_graph or comparison")->capture_default_str();
    feedback->add_option("--language", fb.language)->capture_default_str();
    feedback->add_option("--out", fb.out, "Document to write")->required();
    feedback->add_option("--document-id", fb.document_id, "Fixed document id (random by default)");
    feedback->add_option("--created-at", fb.created_at, "Fixed timestamp (now by default)");
    feedback->add_option("--resource-dir", fb.resource_dir)->capture_default_str();

    fs::path config_path;
    auto* serve = app.add_subcommand("serve", "Run the chat service");
    serve->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

    DemoArgs demo_args;
    auto* demo = app.add_subcommand("demo", "Run one scripted conversation end to end");
    demo->add_option("--out", demo_args.out)->capture_default_str();
    demo->add_option("--data-dir", demo_args.data_dir, "Keep service state here");
    demo->add_option("--transport", demo_args.transport)->check(CLI::IsMember({"in_process", "tcp"}));
    demo->add_option("--resource-dir", demo_args.resource_dir)->capture_default_str();

    fs::path key_out;
    auto* keygen = app.add_subcommand("keygen", "Create a token issuer key");
    keygen->add_option("--out", key_out)->required();

    fs::path key_file;
    std::string subject;
    int ttl_hours = 24;
    auto* token = app.add_subcommand("token", "Issue an access token");
    token->add_option("--key", key_file)->required()->check(CLI::ExistingFile);
    token->add_option("--subject", subject)->required();
    token->add_option("--ttl-hours", ttl_hours)->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*refgraph) return run_refgraph(ref);
        if (*cmp) return run_compare(cmp_student, cmp_reference, cmp_out);
        if (*feedback) return run_feedback(fb);
        if (*serve) return run_serve(config_path);
        if (*demo) return run_demo(demo_args);
        if (*keygen) return run_keygen(key_out);
        if (*token) return run_token(key_file, subject, ttl_hours);
    } catch (const Error& e) {
        std::cerr << "teccobot: " << e.what() << " [" << to_string(e.code()) << "]\n";
        return kFailed;
    } catch (const std::exception& e) {
        std::cerr << "teccobot: " << e.what() << "\n";
        return kFailed;
    }
    return kUsage;
}
