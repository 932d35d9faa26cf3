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

// Feedback templates, graph drawings and the exported feedback document.
//
// Templates are XHTML fragments with placeholders:
//
//   {{shared_concepts}} {{only_student}} {{only_reference}}
//   {{measure:NAME}}    {{linkage:CONCEPT}} {{linkage:*}}
//   {{graph:student}}   {{graph:reference}}
//
// Substituted text is HTML-escaped. Lists are joined with ", ", measures
// are shown with two decimals, graph placeholders become inline SVG.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "teccobot/graph_builder.hpp"
#include "teccobot/graph_compare.hpp"
#include "teccobot/language.hpp"

namespace teccobot {

enum class FeedbackMode { StudentGraph, ReferenceGraph, Comparison };

/// "student_graph", "reference_graph", "comparison".
std::string_view to_string(FeedbackMode mode);
/// Throws Error(InvalidArgument).
FeedbackMode parse_feedback_mode(std::string_view text);

struct FeedbackTemplate {
    std::string template_id;
    Language language = Language::EN;
    std::string body;

    /// Checks that every placeholder belongs to the vocabulary.
    /// Throws Error(InvalidTemplate).
    static FeedbackTemplate parse(std::string template_id, Language language, std::string body);
    /// Reads <dir>/<template_id>.<lang>.html. Throws Error(NotFound) or
    /// Error(InvalidTemplate).
    static FeedbackTemplate load(const std::filesystem::path& dir, const std::string& template_id,
                                 Language language);
};

struct Attachment {
    std::string name;
    std::string media_type;
    std::string bytes;
    bool inlined = false;  // already embedded in rendered_body

    bool operator==(const Attachment&) const = default;
};

struct FeedbackDocument {
    std::string document_id;
    FeedbackMode mode = FeedbackMode::Comparison;
    std::string template_id;
    Language language = Language::EN;
    std::string rendered_body;
    std::vector<Attachment> attachments;
    std::string created_at;  // ISO 8601 UTC
    std::string student_fingerprint;
    std::string reference_fingerprint;
    Measures measures;
    std::vector<std::string> shared_concepts;

    bool operator==(const FeedbackDocument&) const = default;
};

struct DocumentOptions {
    std::string document_id;  // random when empty
    std::string created_at;   // current time when empty
};

/// Undirected DOT graph, nodes and edges in sorted order. Edge pen width
/// grows with the rank of the edge strength among distinct strengths.
std::string render_graph_dot(const ConceptGraph& g);

/// Standalone SVG drawing with a deterministic force-directed layout.
std::string render_graph_svg(const ConceptGraph& g);

/// Pen width in [1, 4] for every edge, in edge order.
std::vector<double> edge_pen_widths(const ConceptGraph& g);

/// Two decimals, round half up on the exact rational.
std::string format_measure(const Ratio& r);

/// The graphs must match the report fingerprints (Error(InvalidArgument)).
/// Throws Error(UnresolvedPlaceholder) naming the offending placeholder,
/// Error(ModeMismatch) when the template uses content the mode excludes.
FeedbackDocument fill_template(const FeedbackTemplate& t, const ComparisonReport& report, FeedbackMode mode,
                               const ConceptGraph& student, const ConceptGraph& reference,
                               const DocumentOptions& options = {});

/// Single self-contained XHTML-compatible file with embedded SVG, styles
/// and a JSON footer (script#teccobot-report).
std::string export_document(const FeedbackDocument& d);

/// The rendered body between the body markers of an exported document.
/// Throws Error(ParseError) if the markers are missing.
std::string extract_rendered_body(std::string_view html);

/// Footer JSON of an exported document. Throws Error(ParseError).
std::string extract_report_json(std::string_view html);

}  // namespace teccobot
