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

#include "teccobot/graph_compare.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "json_util.hpp"
#include "teccobot/error.hpp"

namespace teccobot {
namespace {

using u128 = unsigned __int128;

u128 gcd128(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

template <typename T>
Ratio jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return Ratio::one();
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    return Ratio(common, a.size() + b.size() - common);
}

std::set<std::pair<std::string, std::string>> edge_set(const ConceptGraph& g) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& e : g.edges) out.insert(std::minmax(e.a, e.b));
    return out;
}

std::map<std::string, std::vector<std::string>> adjacency(const ConceptGraph& g) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& v : g.vertices) adj[v.label];
    for (const auto& e : g.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& [_, n] : adj) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return adj;
}

}  // namespace

Ratio::Ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "ratio with zero denominator");
    std::uint64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

bool Ratio::operator<(const Ratio& other) const {
    return static_cast<u128>(num_) * other.den_ < static_cast<u128>(other.num_) * den_;
}

Ratio min_over_max(const Ratio& a, const Ratio& b) {
    if (a.num() == 0 && b.num() == 0) return Ratio::one();
    const Ratio& lo = a < b ? a : b;
    const Ratio& hi = a < b ? b : a;
    u128 num = static_cast<u128>(lo.num()) * hi.den();
    u128 den = static_cast<u128>(lo.den()) * hi.num();
    u128 g = gcd128(num, den);
    return Ratio(static_cast<std::uint64_t>(num / g), static_cast<std::uint64_t>(den / g));
}

std::array<std::pair<std::string_view, Ratio>, 6> Measures::items() const {
    return {{{kMeasureNames[0], concept_match},
             {kMeasureNames[1], propositional_match},
             {kMeasureNames[2], surface_match},
             {kMeasureNames[3], graphical_match},
             {kMeasureNames[4], gamma_match},
             {kMeasureNames[5], structural_match}}};
}

const Ratio& Measures::get(std::string_view name) const {
    if (name == "concept_match") return concept_match;
    if (name == "propositional_match") return propositional_match;
    if (name == "surface_match") return surface_match;
    if (name == "graphical_match") return graphical_match;
    if (name == "gamma_match") return gamma_match;
    if (name == "structural_match") return structural_match;
    throw Error(ErrorCode::InvalidArgument, "unknown measure: " + std::string(name));
}

Ratio concept_match(const ConceptGraph& a, const ConceptGraph& b) {
    auto la = a.labels();
    auto lb = b.labels();
    return jaccard(std::set<std::string>(la.begin(), la.end()), std::set<std::string>(lb.begin(), lb.end()));
}

Ratio propositional_match(const ConceptGraph& a, const ConceptGraph& b) {
    return jaccard(edge_set(a), edge_set(b));
}

Ratio surface_match(const ConceptGraph& a, const ConceptGraph& b) {
    return min_over_max(Ratio(edge_set(a).size(), 1), Ratio(edge_set(b).size(), 1));
}

std::size_t diameter(const ConceptGraph& g) {
    auto adj = adjacency(g);
    std::size_t best = 0;
    for (const auto& [source, _] : adj) {
        std::map<std::string_view, std::size_t> dist;
        std::deque<std::string_view> queue{source};
        dist[source] = 0;
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            std::size_t d = dist[u];
            best = std::max(best, d);
            for (const auto& v : adj.find(std::string(u))->second) {
                if (dist.emplace(v, d + 1).second) queue.push_back(v);
            }
        }
    }
    return best;
}

Ratio graphical_match(const ConceptGraph& a, const ConceptGraph& b) {
    return min_over_max(Ratio(diameter(a), 1), Ratio(diameter(b), 1));
}

Ratio density(const ConceptGraph& g) {
    const std::uint64_t v = g.vertices.size();
    if (v <= 1) return Ratio::zero();
    return Ratio(2 * edge_set(g).size(), v * (v - 1));
}

Ratio gamma_match(const ConceptGraph& a, const ConceptGraph& b) { return min_over_max(density(a), density(b)); }

std::vector<std::size_t> degree_sequence(const ConceptGraph& g) {
    std::vector<std::size_t> out;
    for (const auto& [_, n] : adjacency(g)) out.push_back(n.size());
    std::sort(out.rbegin(), out.rend());
    return out;
}

Ratio structural_match(const ConceptGraph& a, const ConceptGraph& b) {
    auto da = degree_sequence(a);
    auto db = degree_sequence(b);
    const std::size_t n = std::max(da.size(), db.size());
    da.resize(n, 0);
    db.resize(n, 0);
    std::uint64_t diff = 0;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        diff += da[i] > db[i] ? da[i] - db[i] : db[i] - da[i];
        total += std::max(da[i], db[i]);
    }
    if (total == 0) return Ratio::one();
    return Ratio(total - diff, total);
}

ComparisonReport compare(const ConceptGraph& student, const ConceptGraph& reference) {
    ComparisonReport r;
    r.measures.concept_match = concept_match(student, reference);
    r.measures.propositional_match = propositional_match(student, reference);
    r.measures.surface_match = surface_match(student, reference);
    r.measures.graphical_match = graphical_match(student, reference);
    r.measures.gamma_match = gamma_match(student, reference);
    r.measures.structural_match = structural_match(student, reference);

    auto ls = student.labels();
    auto lr = reference.labels();
    std::sort(ls.begin(), ls.end());
    std::sort(lr.begin(), lr.end());
    std::set_intersection(ls.begin(), ls.end(), lr.begin(), lr.end(), std::back_inserter(r.shared_concepts));
    std::set_difference(ls.begin(), ls.end(), lr.begin(), lr.end(), std::back_inserter(r.only_student));
    std::set_difference(lr.begin(), lr.end(), ls.begin(), ls.end(), std::back_inserter(r.only_reference));

    auto adj = adjacency(student);
    for (const auto& c : r.shared_concepts) r.linkage_statements.push_back({c, adj[c]});

    r.student_fingerprint = graph_fingerprint(student);
    r.reference_fingerprint = graph_fingerprint(reference);
    return r;
}

std::string to_canonical_json(const ComparisonReport& report) {
    return detail::canonical_dump(detail::report_to_json(report));
}

ComparisonReport comparison_report_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("comparison report is not valid JSON: ") + e.what());
    }
    return detail::report_from_json(j);
}

}  // namespace teccobot
