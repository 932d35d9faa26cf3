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

// Similarity measures between two concept graphs.
//
// Every measure is an exact rational in [0,1] and symmetric in its
// arguments. Edge strengths never enter a measure; they are display data.
//
//   concept       |VA ∩ VB| / |VA ∪ VB|          (1 if both empty)
//   propositional |EA ∩ EB| / |EA ∪ EB|          (1 if both empty)
//   surface       min(|EA|,|EB|) / max(...)      (1 if both 0)
//   graphical     min(diamA,diamB) / max(...)    (1 if both 0)
//   gamma         min(densA,densB) / max(...)    (1 if both 0)
//   structural    1 - Σ|dA_i - dB_i| / Σ max(dA_i, dB_i) over descending,
//                 zero-padded degree sequences   (1 if both sums 0)

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "teccobot/graph_builder.hpp"

namespace teccobot {

/// Non-negative rational kept in lowest terms.
class Ratio {
public:
    Ratio() = default;
    /// Throws Error(InvalidArgument) if den == 0.
    Ratio(std::uint64_t num, std::uint64_t den);

    static Ratio one() { return Ratio(1, 1); }
    static Ratio zero() { return Ratio(0, 1); }

    std::uint64_t num() const noexcept { return num_; }
    std::uint64_t den() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    bool operator==(const Ratio&) const = default;
    bool operator<(const Ratio& other) const;

private:
    std::uint64_t num_ = 0;
    std::uint64_t den_ = 1;
};

/// min(a, b) / max(a, b); one if both are zero.
Ratio min_over_max(const Ratio& a, const Ratio& b);

inline constexpr std::array<std::string_view, 6> kMeasureNames = {
    "concept_match", "propositional_match", "surface_match",
    "graphical_match", "gamma_match", "structural_match"};

struct Measures {
    Ratio concept_match;
    Ratio propositional_match;
    Ratio surface_match;
    Ratio graphical_match;
    Ratio gamma_match;
    Ratio structural_match;

    /// In kMeasureNames order.
    std::array<std::pair<std::string_view, Ratio>, 6> items() const;
    /// Throws Error(InvalidArgument) for an unknown name.
    const Ratio& get(std::string_view name) const;

    bool operator==(const Measures&) const = default;
};

struct LinkageStatement {
    std::string concept_label;
    std::vector<std::string> neighbors_in_student;

    bool operator==(const LinkageStatement&) const = default;
};

struct ComparisonReport {
    Measures measures;
    std::vector<std::string> shared_concepts;
    std::vector<std::string> only_student;
    std::vector<std::string> only_reference;
    std::vector<LinkageStatement> linkage_statements;
    std::string student_fingerprint;
    std::string reference_fingerprint;

    bool operator==(const ComparisonReport&) const = default;
};

Ratio concept_match(const ConceptGraph& a, const ConceptGraph& b);
Ratio propositional_match(const ConceptGraph& a, const ConceptGraph& b);
Ratio surface_match(const ConceptGraph& a, const ConceptGraph& b);
Ratio graphical_match(const ConceptGraph& a, const ConceptGraph& b);
Ratio gamma_match(const ConceptGraph& a, const ConceptGraph& b);
Ratio structural_match(const ConceptGraph& a, const ConceptGraph& b);

/// Longest finite shortest path, in edges; 0 for graphs with < 2 vertices.
std::size_t diameter(const ConceptGraph& g);
/// 2|E| / (|V|(|V|-1)), zero for |V| <= 1.
Ratio density(const ConceptGraph& g);
/// Vertex degrees, descending.
std::vector<std::size_t> degree_sequence(const ConceptGraph& g);

ComparisonReport compare(const ConceptGraph& student, const ConceptGraph& reference);

std::string to_canonical_json(const ComparisonReport& report);
/// Throws Error(ParseError).
ComparisonReport comparison_report_from_json(std::string_view text);

}  // namespace teccobot
