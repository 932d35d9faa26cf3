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

// Concept graph construction from tokenized sentences.
//
// Co-occurrence is counted with sentence windows and set semantics: every
// unordered pair of distinct stems appearing in the same sentence adds one
// to the pair's count, no matter how often either stem repeats there.
// Concepts are the most frequent stems; the graph keeps the strongest
// associations and then joins components with the strongest remaining
// candidates. All orderings are total, so builds are byte-reproducible.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teccobot/text_pipeline.hpp"

namespace teccobot {

inline constexpr std::string_view kBuilderVersion = "teccobot-graph/1";
inline constexpr std::string_view kConceptGraphFormat = "teccobot.concept-graph/1";

struct AssociationMatrix {
    std::vector<std::string> terms;        // ascending
    std::vector<std::uint32_t> term_freq;  // sentences containing the term
    std::vector<std::uint32_t> counts;     // row-major, size() * size()

    std::size_t size() const noexcept { return terms.size(); }
    std::uint32_t count(std::size_t i, std::size_t j) const { return counts[i * terms.size() + j]; }
    std::uint64_t row_sum(std::size_t i) const;
    std::optional<std::size_t> index_of(std::string_view term) const;

    bool operator==(const AssociationMatrix&) const = default;
};

struct GraphParams {
    std::size_t max_concepts = 25;
    std::size_t max_edges = 40;

    /// SHA-256 of the canonical parameter string.
    std::string hash() const;
};

struct Vertex {
    std::string label;
    std::uint32_t weight = 0;

    bool operator==(const Vertex&) const = default;
};

/// Undirected; a < b (bytewise).
struct Edge {
    std::string a;
    std::string b;
    std::uint32_t strength = 0;

    bool operator==(const Edge&) const = default;
};

struct GraphMeta {
    std::string source_id;
    std::string params_hash;
    std::string stopword_hash;
    std::string builder_version{kBuilderVersion};
    std::vector<std::string> isolated_dropped;

    bool operator==(const GraphMeta&) const = default;
};

struct ConceptGraph {
    std::vector<Vertex> vertices;  // sorted by label
    std::vector<Edge> edges;       // sorted by (a, b)
    GraphMeta meta;

    bool has_vertex(std::string_view label) const;
    std::vector<std::string> labels() const;

    bool operator==(const ConceptGraph&) const = default;
};

/// Throws Error(EmptyInput) if every sentence is empty.
AssociationMatrix build_association_matrix(std::span<const TokenizedSentence> sentences);

/// Top `max_concepts` terms by (frequency desc, row sum desc, label asc).
std::vector<std::string> select_concepts(const AssociationMatrix& matrix, std::size_t max_concepts);

/// Throws Error(EmptyConcepts) for an empty concept list and
/// Error(InvalidArgument) for a concept missing from the matrix.
ConceptGraph build_graph(const AssociationMatrix& matrix, std::span<const std::string> concepts,
                         std::size_t max_edges);

/// Matrix, concept selection and graph in one call; fills meta.
ConceptGraph build_concept_graph(std::span<const TokenizedSentence> sentences, const GraphParams& params,
                                 std::string source_id, std::string stopword_hash);

/// Content hash over sorted vertices and edges (metadata excluded).
std::string graph_fingerprint(const ConceptGraph& graph);

/// Checks the structural invariants of a graph read from outside. Throws
/// Error(ParseError) naming the first violation.
void validate_graph(const ConceptGraph& graph);

bool is_connected(const ConceptGraph& graph);

/// Canonical text form: sorted keys, sorted vertices and edges, two-space
/// indent, trailing newline.
std::string to_canonical_json(const ConceptGraph& graph);
ConceptGraph concept_graph_from_json(std::string_view text);

}  // namespace teccobot
