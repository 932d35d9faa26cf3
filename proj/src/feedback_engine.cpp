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

#include "teccobot/feedback_engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "teccobot/clock.hpp"
#include "teccobot/error.hpp"
#include "teccobot/hashing.hpp"
#include "utf8.hpp"

namespace teccobot {

namespace {

constexpr std::string_view kBodyBegin = "<!-- body:begin -->\n";
constexpr std::string_view kBodyEnd = "\n<!-- body:end -->";
constexpr std::string_view kReportOpen = "<script type=\"application/json\" id=\"teccobot-report\">";
constexpr std::string_view kReportClose = "</script>";

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            case '{': out += "&#123;"; break;
            case '}': out += "&#125;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string escape_dot(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s == "-0.0" || s == "-0.00") s.erase(0, 1);
    return s;
}

std::string_view none_word(Language lang) { return lang == Language::DE ? "(keine)" : "(none)"; }

std::string join_list(const std::vector<std::string>& items, Language lang) {
    if (items.empty()) return std::string(none_word(lang));
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ", ";
        out += item;
    }
    return out;
}

std::string linkage_text(const LinkageStatement& s, Language lang) {
    return s.concept_label + ": " + join_list(s.neighbors_in_student, lang);
}

struct Placeholder {
    std::size_t begin;
    std::size_t end;  // one past "}}"
    std::string name;
};

/// Throws UnresolvedPlaceholder for an unterminated "{{".
std::vector<Placeholder> scan_placeholders(std::string_view body) {
    std::vector<Placeholder> out;
    std::size_t pos = 0;
    while ((pos = body.find("{{", pos)) != std::string_view::npos) {
        std::size_t close = body.find("}}", pos + 2);
        std::size_t next_open = body.find("{{", pos + 2);
        if (close == std::string_view::npos || (next_open != std::string_view::npos && next_open < close)) {
            std::string fragment(body.substr(pos, std::min<std::size_t>(24, body.size() - pos)));
            throw Error(ErrorCode::UnresolvedPlaceholder, "unterminated placeholder: " + fragment);
        }
        out.push_back({pos, close + 2, std::string(body.substr(pos + 2, close - pos - 2))});
        pos = close + 2;
    }
    return out;
}

bool is_measure_name(std::string_view name) {
    return std::find(kMeasureNames.begin(), kMeasureNames.end(), name) != kMeasureNames.end();
}

bool in_vocabulary(const std::string& name) {
    if (name == "shared_concepts" || name == "only_student" || name == "only_reference") return true;
    if (name == "graph:student" || name == "graph:reference") return true;
    if (name.rfind("measure:", 0) == 0) return is_measure_name(std::string_view(name).substr(8));
    if (name.rfind("linkage:", 0) == 0) return name.size() > 8;
    return false;
}

// ------------------------------------------------------------ layout

struct Point {
    double x;
    double y;
};

constexpr double kCanvas = 480.0;
constexpr int kLayoutIterations = 200;

std::vector<Point> layout(const ConceptGraph& g) {
    const std::size_t n = g.vertices.size();
    std::vector<Point> pos(n);
    const double center = kCanvas / 2;
    if (n == 1) {
        pos[0] = {center, center};
        return pos;
    }
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double angle = 2 * pi * static_cast<double>(i) / static_cast<double>(n);
        pos[i] = {center + 0.4 * kCanvas * std::cos(angle), center + 0.4 * kCanvas * std::sin(angle)};
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[g.vertices[i].label] = i;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : g.edges) edges.emplace_back(index.at(e.a), index.at(e.b));

    // Fruchterman-Reingold with linear cooling
    const double k = std::sqrt(kCanvas * kCanvas / static_cast<double>(n)) * 0.6;
    for (int iter = 0; iter < kLayoutIterations; ++iter) {
        const double temperature = kCanvas / 10 * (1.0 - static_cast<double>(iter) / kLayoutIterations);
        std::vector<Point> disp(n, {0, 0});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
                double d = std::max(std::hypot(dx, dy), 0.01);
                double f = k * k / d;
                disp[i].x += dx / d * f;
                disp[i].y += dy / d * f;
                disp[j].x -= dx / d * f;
                disp[j].y -= dy / d * f;
            }
        }
        for (auto [a, b] : edges) {
            double dx = pos[a].x - pos[b].x, dy = pos[a].y - pos[b].y;
            double d = std::max(std::hypot(dx, dy), 0.01);
            double f = d * d / k;
            disp[a].x -= dx / d * f;
            disp[a].y -= dy / d * f;
            disp[b].x += dx / d * f;
            disp[b].y += dy / d * f;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double len = std::max(std::hypot(disp[i].x, disp[i].y), 0.01);
            double step = std::min(len, temperature);
            pos[i].x = std::clamp(pos[i].x + disp[i].x / len * step, 0.0, kCanvas);
            pos[i].y = std::clamp(pos[i].y + disp[i].y / len * step, 0.0, kCanvas);
        }
    }
    return pos;
}

double node_rx(const std::string& label) {
    return 10.0 + 3.8 * static_cast<double>(detail::code_point_count(label));
}

constexpr double kNodeRy = 15.0;

std::string svg_for(const ConceptGraph& g) {
    std::vector<Point> pos = layout(g);
    // round once so bounds and output agree
    for (auto& p : pos) {
        p.x = std::round(p.x * 10) / 10;
        p.y = std::round(p.y * 10) / 10;
    }
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        double rx = node_rx(g.vertices[i].label);
        if (i == 0) {
            min_x = pos[i].x - rx;
            max_x = pos[i].x + rx;
            min_y = pos[i].y - kNodeRy;
            max_y = pos[i].y + kNodeRy;
        }
        min_x = std::min(min_x, pos[i].x - rx);
        max_x = std::max(max_x, pos[i].x + rx);
        min_y = std::min(min_y, pos[i].y - kNodeRy);
        max_y = std::max(max_y, pos[i].y + kNodeRy);
    }
    const double margin = 8;
    min_x -= margin;
    min_y -= margin;
    double width = max_x - min_x + margin;
    double height = max_y - min_y + margin;
    if (g.vertices.empty()) width = height = 2 * margin;

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.vertices.size(); ++i) index[g.vertices[i].label] = i;
    std::vector<double> widths = edge_pen_widths(g);

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" class=\"concept-graph\" viewBox=\"" << fixed(min_x, 1) << ' '
        << fixed(min_y, 1) << ' ' << fixed(width, 1) << ' ' << fixed(height, 1) << "\" width=\"" << fixed(width, 1)
        << "\" height=\"" << fixed(height, 1) << "\">\n";
    out << "<g class=\"edges\" stroke=\"#5b6b7f\" stroke-linecap=\"round\">\n";
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Point& a = pos[index.at(g.edges[i].a)];
        const Point& b = pos[index.at(g.edges[i].b)];
        out << "<line x1=\"" << fixed(a.x, 1) << "\" y1=\"" << fixed(a.y, 1) << "\" x2=\"" << fixed(b.x, 1)
            << "\" y2=\"" << fixed(b.y, 1) << "\" stroke-width=\"" << fixed(widths[i], 2) << "\" />\n";
    }
    out << "</g>\n";
    out << "<g class=\"nodes\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"13\">\n";
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
        const std::string label = escape_html(g.vertices[i].label);
        out << "<g class=\"node\"><ellipse cx=\"" << fixed(pos[i].x, 1) << "\" cy=\"" << fixed(pos[i].y, 1)
            << "\" rx=\"" << fixed(node_rx(g.vertices[i].label), 1) << "\" ry=\"" << fixed(kNodeRy, 1)
            << "\" fill=\"#eef3f8\" stroke=\"#34495e\" />"
            << "<text x=\"" << fixed(pos[i].x, 1) << "\" y=\"" << fixed(pos[i].y + 4.5, 1)
            << "\" text-anchor=\"middle\">" << label << "</text></g>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string html_lang(Language lang) { return std::string(to_string(lang)); }

}  // namespace

std::string_view to_string(FeedbackMode mode) {
    switch (mode) {
        case FeedbackMode::StudentGraph: return "student_graph";
        case FeedbackMode::ReferenceGraph: return "reference_graph";
        case FeedbackMode::Comparison: return "comparison";
    }
    return "comparison";
}

FeedbackMode parse_feedback_mode(std::string_view text) {
    if (text == "student_graph") return FeedbackMode::StudentGraph;
    if (text == "reference_graph") return FeedbackMode::ReferenceGraph;
    if (text == "comparison") return FeedbackMode::Comparison;
    throw Error(ErrorCode::InvalidArgument, "unknown feedback mode: " + std::string(text));
}

FeedbackTemplate FeedbackTemplate::parse(std::string template_id, Language language, std::string body) {
    if (template_id.empty()) throw Error(ErrorCode::InvalidTemplate, "empty template id");
    if (body.find("<!-- body:") != std::string::npos) {
        throw Error(ErrorCode::InvalidTemplate, "template must not contain body markers");
    }
    std::vector<Placeholder> found;
    try {
        found = scan_placeholders(body);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidTemplate, e.what());
    }
    for (const auto& p : found) {
        if (!in_vocabulary(p.name)) {
            throw Error(ErrorCode::InvalidTemplate, "unknown placeholder {{" + p.name + "}}");
        }
    }
    return {std::move(template_id), language, std::move(body)};
}

FeedbackTemplate FeedbackTemplate::load(const std::filesystem::path& dir, const std::string& template_id,
                                        Language language) {
    auto path = dir / (template_id + "." + std::string(to_string(language)) + ".html");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "template not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(template_id, language, buf.str());
}

std::vector<double> edge_pen_widths(const ConceptGraph& g) {
    std::vector<std::uint32_t> distinct;
    for (const auto& e : g.edges) distinct.push_back(e.strength);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> out;
    for (const auto& e : g.edges) {
        if (distinct.size() < 2) {
            out.push_back(1.0);
            continue;
        }
        auto rank = static_cast<double>(std::lower_bound(distinct.begin(), distinct.end(), e.strength) -
                                        distinct.begin());
        out.push_back(1.0 + 3.0 * rank / static_cast<double>(distinct.size() - 1));
    }
    return out;
}

std::string render_graph_dot(const ConceptGraph& g) {
    std::vector<double> widths = edge_pen_widths(g);
    std::ostringstream out;
    out << "graph concepts {\n";
    out << "  graph [layout=neato, overlap=false, splines=true];\n";
    out << "  node [shape=ellipse, fontname=\"Helvetica\"];\n";
    for (const auto& v : g.vertices) {
        out << "  \"" << escape_dot(v.label) << "\" [label=\"" << escape_dot(v.label) << "\"];\n";
    }
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        out << "  \"" << escape_dot(e.a) << "\" -- \"" << escape_dot(e.b) << "\" [penwidth=" << fixed(widths[i], 2)
            << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::string render_graph_svg(const ConceptGraph& g) { return svg_for(g); }

std::string format_measure(const Ratio& r) {
    // hundredths, rounded half up: floor((200 num + den) / (2 den))
    using u128 = unsigned __int128;
    u128 hundredths = (static_cast<u128>(r.num()) * 200 + r.den()) / (static_cast<u128>(r.den()) * 2);
    auto h = static_cast<std::uint64_t>(hundredths);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(h / 100),
                  static_cast<unsigned long long>(h % 100));
    return buf;
}

FeedbackDocument fill_template(const FeedbackTemplate& t, const ComparisonReport& report, FeedbackMode mode,
                               const ConceptGraph& student, const ConceptGraph& reference,
                               const DocumentOptions& options) {
    if (graph_fingerprint(student) != report.student_fingerprint ||
        graph_fingerprint(reference) != report.reference_fingerprint) {
        throw Error(ErrorCode::InvalidArgument, "graphs do not match the comparison report");
    }
    const bool student_allowed = mode != FeedbackMode::ReferenceGraph;
    const bool reference_allowed = mode != FeedbackMode::StudentGraph;

    FeedbackDocument doc;
    doc.mode = mode;
    doc.template_id = t.template_id;
    doc.language = t.language;
    doc.student_fingerprint = report.student_fingerprint;
    doc.reference_fingerprint = report.reference_fingerprint;
    doc.measures = report.measures;
    doc.shared_concepts = report.shared_concepts;
    doc.document_id = options.document_id.empty() ? random_id(16) : options.document_id;
    doc.created_at = options.created_at.empty() ? utc_now() : options.created_at;

    std::string student_svg = student_allowed ? render_graph_svg(student) : std::string();
    std::string reference_svg = reference_allowed ? render_graph_svg(reference) : std::string();
    bool student_inlined = false;
    bool reference_inlined = false;

    auto mismatch = [&](const std::string& name) {
        return Error(ErrorCode::ModeMismatch,
                     "placeholder {{" + name + "}} not allowed in mode " + std::string(to_string(mode)));
    };
    auto resolve = [&](const std::string& name) -> std::string {
        if (name == "shared_concepts") return escape_html(join_list(report.shared_concepts, t.language));
        if (name == "only_student") return escape_html(join_list(report.only_student, t.language));
        if (name == "only_reference") {
            if (!reference_allowed) throw mismatch(name);
            return escape_html(join_list(report.only_reference, t.language));
        }
        if (name == "graph:student") {
            if (!student_allowed) throw mismatch(name);
            student_inlined = true;
            return student_svg;
        }
        if (name == "graph:reference") {
            if (!reference_allowed) throw mismatch(name);
            reference_inlined = true;
            return reference_svg;
        }
        if (name.rfind("measure:", 0) == 0) {
            std::string_view measure = std::string_view(name).substr(8);
            if (is_measure_name(measure)) return format_measure(report.measures.get(measure));
        }
        if (name == "linkage:*") {
            if (report.linkage_statements.empty()) return std::string(none_word(t.language));
            std::string out;
            for (const auto& s : report.linkage_statements) {
                if (!out.empty()) out += "; ";
                out += linkage_text(s, t.language);
            }
            return escape_html(out);
        }
        if (name.rfind("linkage:", 0) == 0) {
            std::string label = name.substr(8);
            for (const auto& s : report.linkage_statements) {
                if (s.concept_label == label) return escape_html(join_list(s.neighbors_in_student, t.language));
            }
        }
        throw Error(ErrorCode::UnresolvedPlaceholder, "cannot resolve placeholder {{" + name + "}}");
    };

    std::string body;
    std::size_t cursor = 0;
    for (const auto& p : scan_placeholders(t.body)) {
        body.append(t.body, cursor, p.begin - cursor);
        body += resolve(p.name);
        cursor = p.end;
    }
    body.append(t.body, cursor, std::string::npos);
    if (body.find("{{") != std::string::npos) {
        throw Error(ErrorCode::UnresolvedPlaceholder, "unresolved placeholder left in rendered body");
    }
    doc.rendered_body = std::move(body);

    if (student_allowed) {
        doc.attachments.push_back({"student_graph.svg", "image/svg+xml", student_svg, student_inlined});
        doc.attachments.push_back({"student_graph.dot", "text/vnd.graphviz", render_graph_dot(student), false});
    }
    if (reference_allowed) {
        doc.attachments.push_back({"reference_graph.svg", "image/svg+xml", reference_svg, reference_inlined});
        doc.attachments.push_back({"reference_graph.dot", "text/vnd.graphviz", render_graph_dot(reference), false});
    }
    return doc;
}

std::string export_document(const FeedbackDocument& d) {
    const bool de = d.language == Language::DE;
    nlohmann::json footer = {
        {"format", "teccobot.feedback-document/1"},
        {"document_id", d.document_id},
        {"mode", std::string(to_string(d.mode))},
        {"template_id", d.template_id},
        {"language", html_lang(d.language)},
        {"created_at", d.created_at},
        {"student_fingerprint", d.student_fingerprint},
        {"reference_fingerprint", d.reference_fingerprint},
    };
    nlohmann::json measures = nlohmann::json::object();
    for (const auto& [name, value] : d.measures.items()) measures[std::string(name)] = detail::ratio_to_json(value);
    footer["measures"] = measures;
    footer["shared_concepts"] = d.shared_concepts;
    nlohmann::json names = nlohmann::json::array();
    for (const auto& a : d.attachments) names.push_back(a.name);
    footer["attachments"] = names;

    std::string footer_text;
    for (char c : footer.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict)) {
        if (c == '<') footer_text += "\\u003c";
        else if (c == '>') footer_text += "\\u003e";
        else if (c == '&') footer_text += "\\u0026";
        else footer_text += c;
    }

    std::ostringstream out;
    out << "<!DOCTYPE html>\n";
    out << "<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"" << html_lang(d.language) << "\" xml:lang=\""
        << html_lang(d.language) << "\">\n";
    out << "<head>\n<meta charset=\"utf-8\" />\n";
    out << "<title>" << (de ? "Rückmeldung zu deinem Text" : "Feedback on your text") << "</title>\n";
    out << "<style>\n"
           "body { font-family: Helvetica, Arial, sans-serif; line-height: 1.5; color: #1f2933; margin: 2em auto; "
           "max-width: 46em; padding: 0 1em; }\n"
           "h1, h2 { color: #243b53; }\n"
           "figure.graph { margin: 1.5em 0; text-align: center; }\n"
           "svg.concept-graph { max-width: 100%; height: auto; }\n"
           "table.measures td { padding: 0.2em 0.8em; }\n"
           "pre { background: #f0f4f8; padding: 0.8em; overflow-x: auto; }\n"
           "footer { margin-top: 3em; font-size: 0.8em; color: #829ab1; }\n"
           "</style>\n</head>\n<body>\n<main class=\"feedback\">\n";
    out << kBodyBegin << d.rendered_body << kBodyEnd << "\n</main>\n";

    if (!d.attachments.empty()) {
        out << "<section class=\"attachments\">\n<h2>" << (de ? "Graphdateien" : "Graph files") << "</h2>\n";
        for (const auto& a : d.attachments) {
            if (a.media_type == "image/svg+xml") {
                if (a.inlined) continue;
                out << "<figure class=\"graph\">\n" << a.bytes << "<figcaption>" << escape_html(a.name)
                    << "</figcaption>\n</figure>\n";
            } else {
                out << "<details>\n<summary>" << escape_html(a.name) << "</summary>\n<pre>" << escape_html(a.bytes)
                    << "</pre>\n</details>\n";
            }
        }
        out << "</section>\n";
    }
    out << "<footer>\n<p>" << escape_html(d.document_id) << " &#183; " << escape_html(d.created_at) << "</p>\n";
    out << kReportOpen << footer_text << kReportClose << "\n</footer>\n</body>\n</html>\n";
    return out.str();
}

std::string extract_rendered_body(std::string_view html) {
    auto begin = html.find(kBodyBegin);
    auto end = html.find(kBodyEnd);
    if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) {
        throw Error(ErrorCode::ParseError, "document body markers not found");
    }
    begin += kBodyBegin.size();
    return std::string(html.substr(begin, end - begin));
}

std::string extract_report_json(std::string_view html) {
    auto begin = html.find(kReportOpen);
    if (begin == std::string_view::npos) throw Error(ErrorCode::ParseError, "report footer not found");
    begin += kReportOpen.size();
    auto end = html.find(kReportClose, begin);
    if (end == std::string_view::npos) throw Error(ErrorCode::ParseError, "report footer not terminated");
    return std::string(html.substr(begin, end - begin));
}

}  // namespace teccobot
