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

#include <gtest/gtest.h>

#include <httplib.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>

#include "service_support.hpp"
#include "teccobot/feedback_engine.hpp"
#include "teccobot/graph_compare.hpp"
#include "teccobot/text_pipeline.hpp"

extern char** environ;

namespace teccobot {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::ScratchDir;

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

CliRun cli(const ScratchDir& dir, const std::vector<std::string>& args) {
    std::string command = quote(TECCOBOT_CLI);
    for (const auto& a : args) command += " " + quote(a);
    fs::path out = dir.path() / "stdout.txt";
    fs::path err = dir.path() / "stderr.txt";
    command += " >" + quote(out.string()) + " 2>" + quote(err.string());
    int status = std::system(command.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

fs::path sample(const std::string& name) { return testing::resource_dir() / "samples" / name; }

ConceptGraph api_graph_with(const fs::path& input, Language lang, const std::string& source, GraphParams params) {
    auto res = LanguageResources::load(testing::resource_dir(), lang);
    return build_concept_graph(analyze_text(RawSubmissionText(read_file(input), lang, source), res, 0), params,
                               source, res.stopwords.content_hash());
}

ConceptGraph api_graph(const fs::path& input, Language lang, const std::string& source) {
    return api_graph_with(input, lang, source, {});
}

class CliTest : public ::testing::Test {
protected:
    ScratchDir dir;
    fs::path at(const std::string& name) const { return dir.path() / name; }

    void build_graphs() {
        ASSERT_EQ(cli(dir, {"refgraph", "--input", sample("reference_en.txt"), "--out", at("ref.json")}).exit_code, 0);
        ASSERT_EQ(cli(dir, {"refgraph", "--input", sample("student_en.txt"), "--out", at("stu.json")}).exit_code, 0);
    }
};

TEST_F(CliTest, RefgraphMatchesLibraryAndIsDeterministic) {
    CliRun r = cli(dir, {"refgraph", "--input", sample("reference_en.txt"), "--language", "en", "--out", at("g1.json")});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("vertices"), std::string::npos);
    std::string first = read_file(at("g1.json"));
    ConceptGraph g = concept_graph_from_json(first);
    EXPECT_LE(g.vertices.size(), 25u);
    EXPECT_TRUE(is_connected(g));
    EXPECT_EQ(first, to_canonical_json(api_graph(sample("reference_en.txt"), Language::EN, "reference_en")));
    for (int i = 0; i < 3; ++i) {
        ASSERT_EQ(cli(dir, {"refgraph", "--input", sample("reference_en.txt"), "--out", at("g2.json")}).exit_code, 0);
        EXPECT_EQ(read_file(at("g2.json")), first);
    }
}

TEST_F(CliTest, RefgraphGerman) {
    CliRun r = cli(dir, {"refgraph", "--input", sample("reference_de.txt"), "--language", "de", "--out", at("de.json"),
                      "--max-concepts", "10", "--max-edges", "15"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    ConceptGraph g = concept_graph_from_json(read_file(at("de.json")));
    EXPECT_LE(g.vertices.size(), 10u);
    EXPECT_EQ(to_canonical_json(g),
              to_canonical_json(api_graph_with(sample("reference_de.txt"), Language::DE, "reference_de", {10, 15})));
}

TEST_F(CliTest, ErrorsUseStableExitCodes) {
    { std::ofstream(at("empty.txt")); }
    CliRun empty = cli(dir, {"refgraph", "--input", at("empty.txt"), "--out", at("e.json")});
    EXPECT_EQ(empty.exit_code, 2);
    EXPECT_NE(empty.err.find("clean:"), std::string::npos);
    EXPECT_FALSE(fs::exists(at("e.json")));

    EXPECT_EQ(cli(dir, {"refgraph", "--input", sample("reference_en.txt")}).exit_code, 1);
    EXPECT_EQ(cli(dir, {"refgraph", "--input", at("missing.txt"), "--out", at("x.json")}).exit_code, 1);
    EXPECT_EQ(cli(dir, {"frobnicate"}).exit_code, 1);
    EXPECT_EQ(cli(dir, {}).exit_code, 1);
    EXPECT_EQ(cli(dir, {"--help"}).exit_code, 0);
    EXPECT_EQ(cli(dir, {"refgraph", "--input", sample("reference_en.txt"), "--language", "fr", "--out",
                        at("x.json")})
                  .exit_code,
              2);

    { std::ofstream(at("bad.json")) << "{not json"; }
    CliRun bad = cli(dir, {"compare", "--student", at("bad.json"), "--reference", at("bad.json"), "--out", at("r.json")});
    EXPECT_EQ(bad.exit_code, 2);
    EXPECT_NE(bad.err.find("bad.json"), std::string::npos);
}

TEST_F(CliTest, CompareSelfAndLibraryEquality) {
    build_graphs();
    CliRun self = cli(dir, {"compare", "--student", at("ref.json"), "--reference", at("ref.json"), "--out", at("s.json")});
    ASSERT_EQ(self.exit_code, 0) << self.err;
    for (const char* m : {"concept_match", "propositional_match", "surface_match", "graphical_match", "gamma_match",
                          "structural_match"}) {
        EXPECT_NE(self.out.find(std::string(m)), std::string::npos);
    }
    std::size_t ones = 0;
    for (std::size_t p = self.out.find("1.00"); p != std::string::npos; p = self.out.find("1.00", p + 1)) ++ones;
    EXPECT_EQ(ones, 6u);

    CliRun pair = cli(dir, {"compare", "--student", at("stu.json"), "--reference", at("ref.json"), "--out", at("p.json")});
    ASSERT_EQ(pair.exit_code, 0);
    ComparisonReport direct = compare(concept_graph_from_json(read_file(at("stu.json"))),
                                      concept_graph_from_json(read_file(at("ref.json"))));
    EXPECT_EQ(read_file(at("p.json")), to_canonical_json(direct));
    EXPECT_NE(pair.out.find(format_measure(direct.measures.concept_match)), std::string::npos);
}

TEST_F(CliTest, CompareDisjointGraphs) {
    { std::ofstream(at("a.txt")) << "Alpha beta gamma. Alpha beta gamma. Beta gamma alpha."; }
    { std::ofstream(at("b.txt")) << "Delta epsilon zeta. Delta epsilon zeta. Zeta delta epsilon."; }
    ASSERT_EQ(cli(dir, {"refgraph", "--input", at("a.txt"), "--out", at("a.json")}).exit_code, 0);
    ASSERT_EQ(cli(dir, {"refgraph", "--input", at("b.txt"), "--out", at("b.json")}).exit_code, 0);
    CliRun r = cli(dir, {"compare", "--student", at("a.json"), "--reference", at("b.json"), "--out", at("r.json")});
    ASSERT_EQ(r.exit_code, 0);
    ComparisonReport report = comparison_report_from_json(read_file(at("r.json")));
    EXPECT_EQ(report.measures.concept_match, Ratio::zero());
    EXPECT_EQ(report.measures.propositional_match, Ratio::zero());
    EXPECT_NE(r.out.find("0.00"), std::string::npos);
}

TEST_F(CliTest, FeedbackDocumentIsReproducible) {
    build_graphs();
    ASSERT_EQ(cli(dir, {"compare", "--student", at("stu.json"), "--reference", at("ref.json"), "--out", at("r.json")})
                  .exit_code,
              0);
    std::vector<std::string> base = {"feedback",        "--report",         at("r.json"),  "--student-graph",
                                     at("stu.json"),    "--reference-graph", at("ref.json"), "--template",
                                     "comparison",      "--mode",           "comparison",  "--language",
                                     "en"};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return args;
    };
    std::vector<std::string> fixed = {"--document-id", "doc1", "--created-at", "2026-01-01T00:00:00Z"};
    auto a = fixed, b = fixed;
    a.insert(a.end(), {"--out", at("d1.html")});
    b.insert(b.end(), {"--out", at("d2.html")});
    ASSERT_EQ(cli(dir, with(a)).exit_code, 0);
    ASSERT_EQ(cli(dir, with(b)).exit_code, 0);
    std::string html = read_file(at("d1.html"));
    EXPECT_EQ(html, read_file(at("d2.html")));

    std::string body = extract_rendered_body(html);
    std::size_t svgs = 0;
    for (std::size_t p = body.find("<svg"); p != std::string::npos; p = body.find("<svg", p + 1)) ++svgs;
    EXPECT_EQ(svgs, 2u);

    // library path gives the same bytes
    ComparisonReport report = comparison_report_from_json(read_file(at("r.json")));
    FeedbackDocument doc = fill_template(
        FeedbackTemplate::load(testing::resource_dir() / "templates", "comparison", Language::EN), report,
        FeedbackMode::Comparison, concept_graph_from_json(read_file(at("stu.json"))),
        concept_graph_from_json(read_file(at("ref.json"))), {"doc1", "2026-01-01T00:00:00Z"});
    EXPECT_EQ(export_document(doc), html);

    // without fixed ids only the id and timestamp move
    ASSERT_EQ(cli(dir, with({"--out", at("d3.html")})).exit_code, 0);
    EXPECT_EQ(extract_rendered_body(read_file(at("d3.html"))), body);
}

TEST_F(CliTest, FeedbackErrorsNamePlaceholder) {
    build_graphs();
    ASSERT_EQ(cli(dir, {"compare", "--student", at("stu.json"), "--reference", at("ref.json"), "--out", at("r.json")})
                  .exit_code,
              0);
    { std::ofstream(at("custom.html")) << "<p>{{linkage:unicorn}}</p>"; }
    CliRun r = cli(dir, {"feedback", "--report", at("r.json"), "--student-graph", at("stu.json"), "--reference-graph",
                      at("ref.json"), "--template", at("custom.html"), "--out", at("x.html")});
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.err.find("unicorn"), std::string::npos);

    CliRun gated = cli(dir, {"feedback", "--report", at("r.json"), "--student-graph", at("stu.json"),
                          "--reference-graph", at("ref.json"), "--template", "comparison", "--mode", "student_graph",
                          "--out", at("y.html")});
    EXPECT_EQ(gated.exit_code, 2);
    EXPECT_NE(gated.err.find("mode_mismatch"), std::string::npos);
}

TEST_F(CliTest, DemoWritesDocument) {
    CliRun r = cli(dir, {"demo", "--out", at("demo.html")});
    ASSERT_EQ(r.exit_code, 0) << r.out << r.err;
    std::string html = read_file(at("demo.html"));
    EXPECT_NO_THROW(extract_rendered_body(html));
    EXPECT_NE(r.out.find("feedback document written"), std::string::npos);
}

TEST_F(CliTest, KeygenAndToken) {
    CliRun k = cli(dir, {"keygen", "--out", at("issuer.key")});
    ASSERT_EQ(k.exit_code, 0);
    std::string pub = k.out.substr(k.out.find(' ') + 1, 64);
    CliRun t = cli(dir, {"token", "--key", at("issuer.key"), "--subject", "alice"});
    ASSERT_EQ(t.exit_code, 0);
    std::string token = t.out.substr(0, t.out.find('\n'));
    EXPECT_EQ(verify_token(token, from_hex(pub)).subject, "alice");
}

TEST_F(CliTest, ServeRejectsBadConfig) {
    { std::ofstream(at("bad.json")) << R"({"version": 1, "mystery": true})"; }
    EXPECT_EQ(cli(dir, {"serve", "--config", at("bad.json")}).exit_code, 2);
}

TEST_F(CliTest, ServeAnswersHealthAndStopsOnSignal) {
    IssuerKeys issuer = IssuerKeys::generate();
    ServiceConfig config = testing::service_config(dir.path() / "state", issuer);
    config.port = 0;
    { std::ofstream(at("config.json")) << config.to_json().dump(2); }

    int pipe_fds[2];
    ASSERT_EQ(::pipe(pipe_fds), 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
    std::string bin = TECCOBOT_CLI, sub = "serve", flag = "--config", path = at("config.json").string();
    char* argv[] = {bin.data(), sub.data(), flag.data(), path.data(), nullptr};
    pid_t pid = 0;
    ASSERT_EQ(posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv, environ), 0);
    posix_spawn_file_actions_destroy(&actions);
    ::close(pipe_fds[1]);

    FILE* out = ::fdopen(pipe_fds[0], "r");
    char line[256] = {};
    ASSERT_NE(std::fgets(line, sizeof line, out), nullptr);
    std::string first(line);
    auto colon = first.rfind(':');
    ASSERT_NE(colon, std::string::npos) << first;
    int port = std::stoi(first.substr(colon + 1));

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/health");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);

    ::kill(pid, SIGTERM);
    int status = 0;
    ::waitpid(pid, &status, 0);
    std::fclose(out);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace teccobot
