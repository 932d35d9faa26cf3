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

#include "json_util.hpp"

#include "teccobot/error.hpp"

namespace teccobot::detail {

using nlohmann::json;

inline constexpr std::string_view kReportFormat = "teccobot.comparison-report/1";

std::string canonical_dump(const json& j) {
    return j.dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

const json& require(const json& j, const char* key) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_string()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t require_uint(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::vector<std::string> require_string_list(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_array()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must hold strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

json graph_to_json(const ConceptGraph& graph) {
    json vertices = json::array();
    for (const auto& v : graph.vertices) vertices.push_back({{"label", v.label}, {"weight", v.weight}});
    json edges = json::array();
    for (const auto& e : graph.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"strength", e.strength}});
    return {
        {"format", kConceptGraphFormat},
        {"vertices", vertices},
        {"edges", edges},
        {"meta",
         {{"source_id", graph.meta.source_id},
          {"params_hash", graph.meta.params_hash},
          {"stopword_hash", graph.meta.stopword_hash},
          {"builder_version", graph.meta.builder_version},
          {"isolated_dropped", graph.meta.isolated_dropped}}},
    };
}

ConceptGraph graph_from_json(const json& j) {
    if (require_string(j, "format") != kConceptGraphFormat) {
        throw Error(ErrorCode::ParseError, "unsupported concept graph format");
    }
    ConceptGraph g;
    const json& vertices = require(j, "vertices");
    const json& edges = require(j, "edges");
    if (!vertices.is_array() || !edges.is_array()) {
        throw Error(ErrorCode::ParseError, "vertices and edges must be arrays");
    }
    for (const auto& v : vertices) {
        g.vertices.push_back({require_string(v, "label"), static_cast<std::uint32_t>(require_uint(v, "weight"))});
    }
    for (const auto& e : edges) {
        g.edges.push_back({require_string(e, "a"), require_string(e, "b"),
                           static_cast<std::uint32_t>(require_uint(e, "strength"))});
    }
    const json& meta = require(j, "meta");
    g.meta.source_id = require_string(meta, "source_id");
    g.meta.params_hash = require_string(meta, "params_hash");
    g.meta.stopword_hash = require_string(meta, "stopword_hash");
    g.meta.builder_version = require_string(meta, "builder_version");
    g.meta.isolated_dropped = require_string_list(meta, "isolated_dropped");
    validate_graph(g);
    return g;
}

json ratio_to_json(const Ratio& r) { return {{"num", r.num()}, {"den", r.den()}, {"value", r.value()}}; }

Ratio ratio_from_json(const json& j) {
    std::uint64_t num = require_uint(j, "num");
    std::uint64_t den = require_uint(j, "den");
    if (den == 0 || num > den) throw Error(ErrorCode::ParseError, "measure outside [0,1]");
    return Ratio(num, den);
}

json report_to_json(const ComparisonReport& report) {
    json measures = json::object();
    for (const auto& [name, value] : report.measures.items()) measures[std::string(name)] = ratio_to_json(value);
    json linkage = json::array();
    for (const auto& l : report.linkage_statements) {
        linkage.push_back({{"concept", l.concept_label}, {"neighbors_in_student", l.neighbors_in_student}});
    }
    return {
        {"format", kReportFormat},
        {"measures", measures},
        {"shared_concepts", report.shared_concepts},
        {"only_student", report.only_student},
        {"only_reference", report.only_reference},
        {"linkage_statements", linkage},
        {"student_fingerprint", report.student_fingerprint},
        {"reference_fingerprint", report.reference_fingerprint},
    };
}

ComparisonReport report_from_json(const json& j) {
    if (require_string(j, "format") != kReportFormat) {
        throw Error(ErrorCode::ParseError, "unsupported comparison report format");
    }
    ComparisonReport r;
    const json& m = require(j, "measures");
    r.measures.concept_match = ratio_from_json(require(m, "concept_match"));
    r.measures.propositional_match = ratio_from_json(require(m, "propositional_match"));
    r.measures.surface_match = ratio_from_json(require(m, "surface_match"));
    r.measures.graphical_match = ratio_from_json(require(m, "graphical_match"));
    r.measures.gamma_match = ratio_from_json(require(m, "gamma_match"));
    r.measures.structural_match = ratio_from_json(require(m, "structural_match"));
    r.shared_concepts = require_string_list(j, "shared_concepts");
    r.only_student = require_string_list(j, "only_student");
    r.only_reference = require_string_list(j, "only_reference");
    const json& linkage = require(j, "linkage_statements");
    if (!linkage.is_array()) throw Error(ErrorCode::ParseError, "linkage_statements must be an array");
    for (const auto& l : linkage) {
        r.linkage_statements.push_back({require_string(l, "concept"), require_string_list(l, "neighbors_in_student")});
    }
    r.student_fingerprint = require_string(j, "student_fingerprint");
    r.reference_fingerprint = require_string(j, "reference_fingerprint");
    return r;
}

}  // namespace teccobot::detail
