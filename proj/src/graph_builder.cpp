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

#include "teccobot/graph_builder.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "json_util.hpp"
#include "teccobot/error.hpp"
#include "teccobot/hashing.hpp"

namespace teccobot {
namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

struct Candidate {
    std::size_t u;  // index into the sorted concept list; label(u) < label(v)
    std::size_t v;
    std::uint32_t strength;
};

}  // namespace

std::uint64_t AssociationMatrix::row_sum(std::size_t i) const {
    std::uint64_t sum = 0;
    for (std::size_t j = 0; j < size(); ++j) sum += count(i, j);
    return sum;
}

std::optional<std::size_t> AssociationMatrix::index_of(std::string_view term) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term);
    if (it == terms.end() || *it != term) return std::nullopt;
    return static_cast<std::size_t>(it - terms.begin());
}

std::string GraphParams::hash() const {
    return sha256_hex("max_concepts=" + std::to_string(max_concepts) + ";max_edges=" + std::to_string(max_edges));
}

bool ConceptGraph::has_vertex(std::string_view label) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), label,
                               [](const Vertex& v, std::string_view l) { return v.label < l; });
    return it != vertices.end() && it->label == label;
}

std::vector<std::string> ConceptGraph::labels() const {
    std::vector<std::string> out;
    out.reserve(vertices.size());
    for (const auto& v : vertices) out.push_back(v.label);
    return out;
}

AssociationMatrix build_association_matrix(std::span<const TokenizedSentence> sentences) {
    std::vector<std::set<std::string>> stem_sets;
    std::set<std::string> all;
    for (const auto& sentence : sentences) {
        std::set<std::string> stems;
        for (const auto& token : sentence.tokens) stems.insert(token.stem);
        all.insert(stems.begin(), stems.end());
        if (!stems.empty()) stem_sets.push_back(std::move(stems));
    }
    if (all.empty()) {
        throw Error(ErrorCode::EmptyInput, "no content words in any sentence");
    }

    AssociationMatrix m;
    m.terms.assign(all.begin(), all.end());
    const std::size_t n = m.terms.size();
    m.term_freq.assign(n, 0);
    m.counts.assign(n * n, 0);
    for (const auto& stems : stem_sets) {
        std::vector<std::size_t> idx;
        idx.reserve(stems.size());
        for (const auto& s : stems) idx.push_back(*m.index_of(s));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            ++m.term_freq[idx[i]];
            for (std::size_t j = i + 1; j < idx.size(); ++j) {
                ++m.counts[idx[i] * n + idx[j]];
                ++m.counts[idx[j] * n + idx[i]];
            }
        }
    }
    return m;
}

std::vector<std::string> select_concepts(const AssociationMatrix& matrix, std::size_t max_concepts) {
    std::vector<std::size_t> order(matrix.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> mass(matrix.size());
    for (std::size_t i = 0; i < matrix.size(); ++i) mass[i] = matrix.row_sum(i);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (matrix.term_freq[x] != matrix.term_freq[y]) return matrix.term_freq[x] > matrix.term_freq[y];
        if (mass[x] != mass[y]) return mass[x] > mass[y];
        return matrix.terms[x] < matrix.terms[y];
    });
    order.resize(std::min(order.size(), max_concepts));
    std::vector<std::string> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(matrix.terms[i]);
    return out;
}

ConceptGraph build_graph(const AssociationMatrix& matrix, std::span<const std::string> concepts,
                         std::size_t max_edges) {
    if (concepts.empty()) {
        throw Error(ErrorCode::EmptyConcepts, "cannot build a graph without concepts");
    }
    std::vector<std::string> labels(concepts.begin(), concepts.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    std::vector<std::size_t> row(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto idx = matrix.index_of(labels[i]);
        if (!idx) throw Error(ErrorCode::InvalidArgument, "concept not in matrix: " + labels[i]);
        row[i] = *idx;
    }

    std::vector<Candidate> candidates;
    for (std::size_t u = 0; u < labels.size(); ++u) {
        for (std::size_t v = u + 1; v < labels.size(); ++v) {
            std::uint32_t c = matrix.count(row[u], row[v]);
            if (c > 0) candidates.push_back({u, v, c});
        }
    }
    // labels are sorted, so (u, v) order is the label-pair order
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.strength != y.strength) return x.strength > y.strength;
        return std::tie(x.u, x.v) < std::tie(y.u, y.v);
    });

    const std::size_t kept = std::min(max_edges, candidates.size());
    std::vector<bool> used(candidates.size(), false);
    DisjointSets components(labels.size());
    std::size_t component_count = labels.size();
    for (std::size_t i = 0; i < kept; ++i) {
        used[i] = true;
        if (components.unite(candidates[i].u, candidates[i].v)) --component_count;
    }
    // connectivity repair: strongest remaining candidate that joins two components
    for (std::size_t i = kept; i < candidates.size() && component_count > 1; ++i) {
        if (components.unite(candidates[i].u, candidates[i].v)) {
            used[i] = true;
            --component_count;
        }
    }

    std::vector<bool> keep_vertex(labels.size(), true);
    std::vector<std::string> dropped;
    if (component_count > 1) {
        // largest component wins; ties go to the one holding the smallest label
        std::map<std::size_t, std::size_t> sizes;
        for (std::size_t i = 0; i < labels.size(); ++i) ++sizes[components.find(i)];
        std::size_t best_root = components.find(0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            std::size_t r = components.find(i);
            if (sizes[r] > sizes[best_root]) best_root = r;
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (components.find(i) != best_root) {
                keep_vertex[i] = false;
                dropped.push_back(labels[i]);
            }
        }
    }

    ConceptGraph g;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (keep_vertex[i]) g.vertices.push_back({labels[i], matrix.term_freq[row[i]]});
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (used[i] && keep_vertex[c.u] && keep_vertex[c.v]) {
            g.edges.push_back({labels[c.u], labels[c.v], c.strength});
        }
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    g.meta.isolated_dropped = std::move(dropped);
    return g;
}

ConceptGraph build_concept_graph(std::span<const TokenizedSentence> sentences, const GraphParams& params,
                                 std::string source_id, std::string stopword_hash) {
    AssociationMatrix m = build_association_matrix(sentences);
    auto concepts = select_concepts(m, params.max_concepts);
    ConceptGraph g = build_graph(m, concepts, params.max_edges);
    g.meta.source_id = std::move(source_id);
    g.meta.params_hash = params.hash();
    g.meta.stopword_hash = std::move(stopword_hash);
    return g;
}

std::string graph_fingerprint(const ConceptGraph& graph) {
    std::vector<std::string> vertices;
    for (const auto& v : graph.vertices) vertices.push_back("v\t" + v.label + "\t" + std::to_string(v.weight) + "\n");
    std::vector<std::string> edges;
    for (const auto& e : graph.edges) {
        const auto& [lo, hi] = std::minmax(e.a, e.b);
        edges.push_back("e\t" + lo + "\t" + hi + "\t" + std::to_string(e.strength) + "\n");
    }
    std::sort(vertices.begin(), vertices.end());
    std::sort(edges.begin(), edges.end());
    std::string canonical;
    for (const auto& s : vertices) canonical += s;
    for (const auto& s : edges) canonical += s;
    return sha256_hex(canonical);
}

bool is_connected(const ConceptGraph& graph) {
    if (graph.vertices.empty()) return true;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < graph.vertices.size(); ++i) index[graph.vertices[i].label] = i;
    DisjointSets sets(graph.vertices.size());
    std::size_t components = graph.vertices.size();
    for (const auto& e : graph.edges) {
        auto a = index.find(e.a);
        auto b = index.find(e.b);
        if (a == index.end() || b == index.end()) return false;
        if (sets.unite(a->second, b->second)) --components;
    }
    return components == 1;
}

void validate_graph(const ConceptGraph& graph) {
    for (std::size_t i = 1; i < graph.vertices.size(); ++i) {
        if (!(graph.vertices[i - 1].label < graph.vertices[i].label)) {
            throw Error(ErrorCode::ParseError, "vertices not strictly sorted at '" + graph.vertices[i].label + "'");
        }
    }
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const auto& e = graph.edges[i];
        if (!(e.a < e.b)) throw Error(ErrorCode::ParseError, "edge endpoints not ordered: " + e.a + " -- " + e.b);
        if (e.strength == 0) throw Error(ErrorCode::ParseError, "edge with zero strength: " + e.a + " -- " + e.b);
        if (!graph.has_vertex(e.a) || !graph.has_vertex(e.b)) {
            throw Error(ErrorCode::ParseError, "edge endpoint is not a vertex: " + e.a + " -- " + e.b);
        }
        if (i > 0 && !(std::tie(graph.edges[i - 1].a, graph.edges[i - 1].b) < std::tie(e.a, e.b))) {
            throw Error(ErrorCode::ParseError, "edges not strictly sorted at " + e.a + " -- " + e.b);
        }
    }
}

std::string to_canonical_json(const ConceptGraph& graph) {
    return detail::canonical_dump(detail::graph_to_json(graph));
}

ConceptGraph concept_graph_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("concept graph is not valid JSON: ") + e.what());
    }
    return detail::graph_from_json(j);
}

}  // namespace teccobot
