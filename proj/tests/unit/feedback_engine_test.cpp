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

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include <sstream>

#include "teccobot/error.hpp"
#include "teccobot/feedback_engine.hpp"
#include "test_support.hpp"

namespace teccobot {
namespace {

using testing::make_graph;
using testing::sentence_of;

ConceptGraph cat_dog_graph() {
    std::vector<TokenizedSentence> corpus = {sentence_of({"cat", "chase", "dog"}),
                                             sentence_of({"dog", "chase", "mouse"})};
    return build_concept_graph(corpus, {4, 3}, "cats", "stop");
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

/// Throws boost::property_tree::xml_parser_error on malformed XML.
void parse_xml(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    boost::property_tree::read_xml(in, tree);
}

FeedbackDocument fill(const std::string& body, FeedbackMode mode, const ConceptGraph& s, const ConceptGraph& r) {
    return fill_template(FeedbackTemplate::parse("t", Language::EN, body), compare(s, r), mode, s, r,
                         {"doc-1", "2026-01-01T00:00:00Z"});
}

TEST(RenderDotTest, SingleVertex) {
    std::string dot = render_graph_dot(make_graph({}, {"cat"}));
    EXPECT_EQ(count_occurrences(dot, "[label="), 1u);
    EXPECT_EQ(count_occurrences(dot, " -- "), 0u);
    EXPECT_NE(dot.find("\"cat\" [label=\"cat\"]"), std::string::npos);
}

TEST(RenderDotTest, CatDogLinesMatchGraph) {
    ConceptGraph g = cat_dog_graph();
    ASSERT_EQ(g.vertices.size(), 4u);
    ASSERT_EQ(g.edges.size(), 4u);
    auto lines = lines_of(render_graph_dot(g));
    // header, graph attrs, node attrs, 4 nodes, 4 edges, closing brace
    ASSERT_EQ(lines.size(), 3u + g.vertices.size() + g.edges.size() + 1u);
    EXPECT_EQ(lines.front(), "graph concepts {");
    EXPECT_EQ(lines.back(), "}");
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
        const auto& l = g.vertices[i].label;
        EXPECT_EQ(lines[3 + i], "  \"" + l + "\" [label=\"" + l + "\"];");
    }
    std::vector<double> widths = edge_pen_widths(g);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        EXPECT_EQ(lines[7 + i].rfind("  \"" + e.a + "\" -- \"" + e.b + "\"", 0), 0u) << lines[7 + i];
        EXPECT_DOUBLE_EQ(widths[i], e.strength == 2 ? 4.0 : 1.0);
    }
}

TEST(RenderDotTest, IsByteDeterministicAndEscapesQuotes) {
    ConceptGraph g = cat_dog_graph();
    EXPECT_EQ(render_graph_dot(g), render_graph_dot(g));
    std::string dot = render_graph_dot(make_graph({{"a\"b", "c"}}));
    EXPECT_NE(dot.find("\"a\\\"b\""), std::string::npos);
}

TEST(PenWidthTest, ScalesWithStrengthRank) {
    ConceptGraph g = make_graph({{"a", "b"}, {"b", "c"}, {"c", "d"}});
    g.edges[0].strength = 5;
    g.edges[1].strength = 1;
    g.edges[2].strength = 3;
    EXPECT_EQ(edge_pen_widths(g), (std::vector<double>{4.0, 1.0, 2.5}));
}

TEST(RenderSvgTest, DeterministicWellFormedOneNodePerVertex) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        ConceptGraph g = testing::random_connected_graph(rng, 12);
        std::string svg = render_graph_svg(g);
        ASSERT_EQ(svg, render_graph_svg(g));
        ASSERT_NO_THROW(parse_xml(svg));
        ASSERT_EQ(count_occurrences(svg, "<ellipse"), g.vertices.size());
        ASSERT_EQ(count_occurrences(svg, "<line"), g.edges.size());
        ASSERT_EQ(svg.find("nan"), std::string::npos);
    }
}

TEST(FormatMeasureTest, TwoDecimalsHalfUp) {
    EXPECT_EQ(format_measure(Ratio(1, 2)), "0.50");
    EXPECT_EQ(format_measure(Ratio(2, 3)), "0.67");
    EXPECT_EQ(format_measure(Ratio(1, 3)), "0.33");
    EXPECT_EQ(format_measure(Ratio(1, 200)), "0.01");
    EXPECT_EQ(format_measure(Ratio(1, 201)), "0.00");
    EXPECT_EQ(format_measure(Ratio::one()), "1.00");
    EXPECT_EQ(format_measure(Ratio::zero()), "0.00");
}

TEST(FillTemplateTest, SharedConceptsJoinedWithComma) {
    ConceptGraph s = make_graph({{"cat", "dog"}, {"dog", "owl"}});
    ConceptGraph r = make_graph({{"cat", "dog"}, {"cat", "eel"}});
    FeedbackDocument d = fill("You used: {{shared_concepts}}", FeedbackMode::Comparison, s, r);
    EXPECT_EQ(d.rendered_body, "You used: cat, dog");
}

TEST(FillTemplateTest, MeasureFormatting) {
    ConceptGraph s = make_graph({}, {"a", "b", "c"});
    ConceptGraph r = make_graph({}, {"b", "c", "d"});
    // not connected, but fill_template only needs matching fingerprints
    FeedbackDocument d = fill("{{measure:concept_match}}", FeedbackMode::Comparison, s, r);
    EXPECT_EQ(d.rendered_body, "0.50");
}

TEST(FillTemplateTest, LinkagePlaceholders) {
    ConceptGraph s = make_graph({{"a", "b"}, {"a", "c"}, {"c", "x"}});
    ConceptGraph r = make_graph({{"a", "c"}, {"c", "d"}});
    EXPECT_EQ(fill("{{linkage:a}}", FeedbackMode::Comparison, s, r).rendered_body, "b, c");
    EXPECT_EQ(fill("{{linkage:*}}", FeedbackMode::Comparison, s, r).rendered_body, "a: b, c; c: a, x");
}

TEST(FillTemplateTest, EmptyListsUseNoneWord) {
    ConceptGraph s = make_graph({{"a", "b"}});
    FeedbackDocument d = fill("[{{only_student}}]", FeedbackMode::Comparison, s, s);
    EXPECT_EQ(d.rendered_body, "[(none)]");
}

TEST(FillTemplateTest, ModeMismatch) {
    ConceptGraph s = make_graph({{"a", "b"}});
    ConceptGraph r = make_graph({{"b", "c"}});
    auto expect_code = [&](const std::string& body, FeedbackMode mode, ErrorCode code) {
        try {
            fill(body, mode, s, r);
            ADD_FAILURE() << body;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), code) << body;
        }
    };
    expect_code("{{graph:reference}}", FeedbackMode::StudentGraph, ErrorCode::ModeMismatch);
    expect_code("{{only_reference}}", FeedbackMode::StudentGraph, ErrorCode::ModeMismatch);
    expect_code("{{graph:student}}", FeedbackMode::ReferenceGraph, ErrorCode::ModeMismatch);
    EXPECT_NO_THROW(fill("{{graph:student}}{{graph:reference}}", FeedbackMode::Comparison, s, r));
}

TEST(FillTemplateTest, UnresolvedPlaceholderNamesOffender) {
    ConceptGraph s = make_graph({{"a", "b"}});
    ComparisonReport report = compare(s, s);
    FeedbackTemplate t{"t", Language::EN, "x {{measure:nope}} y"};
    try {
        fill_template(t, report, FeedbackMode::Comparison, s, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnresolvedPlaceholder);
        EXPECT_NE(std::string(e.what()).find("measure:nope"), std::string::npos);
    }
    t.body = "{{linkage:zebra}}";
    EXPECT_THROW(fill_template(t, report, FeedbackMode::Comparison, s, s), Error);
    t.body = "{{shared_concepts";
    EXPECT_THROW(fill_template(t, report, FeedbackMode::Comparison, s, s), Error);
}

TEST(FillTemplateTest, RejectsGraphsThatDoNotMatchReport) {
    ConceptGraph s = make_graph({{"a", "b"}});
    ConceptGraph other = make_graph({{"a", "c"}});
    ComparisonReport report = compare(s, s);
    FeedbackTemplate t{"t", Language::EN, "hi"};
    try {
        fill_template(t, report, FeedbackMode::Comparison, other, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
}

TEST(FillTemplateTest, SubstitutedTextIsEscaped) {
    ConceptGraph s = make_graph({{"a<b", "{{x}}"}});
    FeedbackDocument d = fill("{{shared_concepts}}", FeedbackMode::Comparison, s, s);
    EXPECT_EQ(d.rendered_body.find("{{"), std::string::npos);
    EXPECT_EQ(d.rendered_body.find('<'), std::string::npos);
    EXPECT_NO_THROW(parse_xml("<p>" + d.rendered_body + "</p>"));
}

TEST(TemplateParseTest, RejectsUnknownPlaceholders) {
    EXPECT_THROW(FeedbackTemplate::parse("t", Language::EN, "{{foo}}"), Error);
    EXPECT_THROW(FeedbackTemplate::parse("t", Language::EN, "{{graph:other}}"), Error);
    EXPECT_THROW(FeedbackTemplate::parse("t", Language::EN, "{{measure:score}}"), Error);
    EXPECT_THROW(FeedbackTemplate::parse("t", Language::EN, "{{only_student"), Error);
    EXPECT_NO_THROW(FeedbackTemplate::parse("t", Language::EN, "{{linkage:cat}} {{measure:gamma_match}}"));
    try {
        FeedbackTemplate::load(testing::resource_dir() / "templates", "missing", Language::EN);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotFound);
    }
}

struct ShippedCase {
    std::string id;
    FeedbackMode mode;
};

const std::vector<ShippedCase> kShipped = {{"comparison", FeedbackMode::Comparison},
                                           {"student_graph", FeedbackMode::StudentGraph},
                                           {"reference_graph", FeedbackMode::ReferenceGraph}};

TEST(ShippedTemplatesTest, RenderWellFormedDocuments) {
    ConceptGraph s = cat_dog_graph();
    ConceptGraph r = make_graph({{"cat", "dog"}, {"dog", "wolf"}, {"wolf", "moon"}});
    ComparisonReport report = compare(s, r);
    for (Language lang : {Language::EN, Language::DE}) {
        for (const auto& c : kShipped) {
            auto t = FeedbackTemplate::load(testing::resource_dir() / "templates", c.id, lang);
            FeedbackDocument d = fill_template(t, report, c.mode, s, r);
            EXPECT_EQ(d.rendered_body.find("{{"), std::string::npos);
            std::string html = export_document(d);
            EXPECT_NO_THROW(parse_xml(html)) << c.id;
            for (const char* word : {"score", "grade", "Note", "Punkte"}) {
                EXPECT_EQ(d.rendered_body.find(word), std::string::npos) << c.id << " " << word;
            }
        }
    }
}

TEST(ShippedTemplatesTest, StudentModeNeverShowsReferenceOnlyLabels) {
    ConceptGraph s = make_graph({{"cat", "dog"}, {"dog", "owl"}});
    ConceptGraph r = make_graph({{"cat", "dog"}, {"dog", "zebrafish"}, {"zebrafish", "walrus"}});
    ComparisonReport report = compare(s, r);
    for (Language lang : {Language::EN, Language::DE}) {
        auto t = FeedbackTemplate::load(testing::resource_dir() / "templates", "student_graph", lang);
        std::string html = export_document(fill_template(t, report, FeedbackMode::StudentGraph, s, r));
        EXPECT_EQ(html.find("zebrafish"), std::string::npos);
        EXPECT_EQ(html.find("walrus"), std::string::npos);
        EXPECT_NE(html.find("owl"), std::string::npos);
    }
}

TEST(DocumentTest, AttachmentsFollowMode) {
    ConceptGraph s = make_graph({{"a", "b"}});
    ConceptGraph r = make_graph({{"b", "c"}});
    FeedbackDocument both = fill("x", FeedbackMode::Comparison, s, r);
    ASSERT_EQ(both.attachments.size(), 4u);
    EXPECT_EQ(both.attachments[0].name, "student_graph.svg");
    EXPECT_EQ(both.attachments[2].name, "reference_graph.svg");
    EXPECT_EQ(count_occurrences(export_document(both), "<svg"), 2u);

    FeedbackDocument only = fill("x", FeedbackMode::StudentGraph, s, r);
    ASSERT_EQ(only.attachments.size(), 2u);
    EXPECT_EQ(count_occurrences(export_document(only), "<svg"), 1u);
}

TEST(DocumentTest, InlinedGraphsAreNotEmbeddedTwice) {
    ConceptGraph s = make_graph({{"a", "b"}});
    ConceptGraph r = make_graph({{"b", "c"}});
    FeedbackDocument d = fill("<div>{{graph:student}}</div>", FeedbackMode::Comparison, s, r);
    EXPECT_TRUE(d.attachments[0].inlined);
    EXPECT_FALSE(d.attachments[2].inlined);
    EXPECT_EQ(count_occurrences(export_document(d), "<svg"), 2u);
}

TEST(DocumentTest, ExportIsDeterministicAndCarriesFooter) {
    ConceptGraph s = cat_dog_graph();
    ConceptGraph r = make_graph({{"cat", "dog"}});
    FeedbackDocument d = fill("<p>{{shared_concepts}}</p>", FeedbackMode::Comparison, s, r);
    std::string html = export_document(d);
    EXPECT_EQ(html, export_document(d));
    EXPECT_EQ(extract_rendered_body(html), d.rendered_body);
    auto footer = nlohmann::json::parse(extract_report_json(html));
    EXPECT_EQ(footer["document_id"], "doc-1");
    EXPECT_EQ(footer["student_fingerprint"], graph_fingerprint(s));
    EXPECT_EQ(footer["reference_fingerprint"], graph_fingerprint(r));
    EXPECT_EQ(footer["created_at"], "2026-01-01T00:00:00Z");
    EXPECT_EQ(footer["measures"]["concept_match"]["num"], 1);
    EXPECT_EQ(footer["shared_concepts"], nlohmann::json(compare(s, r).shared_concepts));
    EXPECT_THROW(extract_rendered_body("<html></html>"), Error);
}

TEST(DocumentTest, BodyIgnoresIdAndTimestamp) {
    ConceptGraph s = cat_dog_graph();
    ComparisonReport report = compare(s, s);
    auto t = FeedbackTemplate::load(testing::resource_dir() / "templates", "comparison", Language::EN);
    FeedbackDocument a = fill_template(t, report, FeedbackMode::Comparison, s, s, {"one", "2026-01-01T00:00:00Z"});
    FeedbackDocument b = fill_template(t, report, FeedbackMode::Comparison, s, s);
    EXPECT_EQ(a.rendered_body, b.rendered_body);
    EXPECT_NE(a.document_id, b.document_id);
    EXPECT_EQ(extract_rendered_body(export_document(a)), extract_rendered_body(export_document(b)));
}

TEST(DocumentTest, FooterEscapesMarkup) {
    ConceptGraph s = make_graph({{"a", "b"}});
    FeedbackDocument d = fill("x", FeedbackMode::Comparison, s, s);
    d.document_id = "</script><b>&";
    std::string html = export_document(d);
    std::string footer = extract_report_json(html);
    EXPECT_EQ(footer.find('<'), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(footer)["document_id"], "</script><b>&");
    EXPECT_NO_THROW(parse_xml(html));
}

TEST(FeedbackModeTest, RoundTrip) {
    for (auto m : {FeedbackMode::StudentGraph, FeedbackMode::ReferenceGraph, FeedbackMode::Comparison}) {
        EXPECT_EQ(parse_feedback_mode(to_string(m)), m);
    }
    EXPECT_THROW(parse_feedback_mode("pdf"), Error);
}

}  // namespace
}  // namespace teccobot
