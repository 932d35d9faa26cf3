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

#include "teccobot/text_pipeline.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "teccobot/error.hpp"
#include "teccobot/hashing.hpp"
#include "teccobot/stemmer.hpp"
#include "utf8.hpp"

namespace teccobot {
namespace {

const char* locale_name(Language language) { return language == Language::EN ? "en" : "de"; }

std::string nfc(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        throw Error(ErrorCode::InvalidEncoding, "unicode normalizer unavailable");
    }
    icu::UnicodeString in = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString out = normalizer->normalize(in, status);
    if (U_FAILURE(status)) {
        throw Error(ErrorCode::InvalidEncoding, "unicode normalization failed");
    }
    std::string result;
    out.toUTF8String(result);
    return result;
}

// Maps CR/CRLF to LF, other whitespace to ' ', and drops control and
// format characters.
std::string normalize_characters(const std::u32string& text) {
    std::u32string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char32_t c = text[i];
        if (c == U'\r') {
            out.push_back(U'\n');
            if (i + 1 < text.size() && text[i + 1] == U'\n') ++i;
            continue;
        }
        if (c == U'\n') {
            out.push_back(c);
            continue;
        }
        auto cp = static_cast<UChar32>(c);
        if (u_isUWhiteSpace(cp)) {
            out.push_back(U' ');
            continue;
        }
        int8_t type = u_charType(cp);
        if (type == U_CONTROL_CHAR || type == U_FORMAT_CHAR) {
            continue;
        }
        out.push_back(c);
    }
    return detail::to_utf8(out);
}

std::string strip_markup(std::string text) {
    static const std::regex script_block(R"(<(script|style)\b[^>]*>[\s\S]*?</(script|style)\s*>)",
                                         std::regex::icase);
    static const std::regex comment(R"(<!--[\s\S]*?-->)");
    static const std::regex tag(R"(</?[A-Za-z][^<>]*>)");
    static const std::regex url(R"((?:https?|ftp)://[^\s<>]+|www\.[^\s<>]+)", std::regex::icase);
    // [12], [3, 4], [5-7], [8–9] (en dash)
    static const std::regex citation(R"([ ]*\[[0-9]+(?:[ ]*(?:,|-|\xE2\x80\x93)[ ]*[0-9]+)*\])");

    for (int round = 0; round < 16; ++round) {
        std::string next = std::regex_replace(text, script_block, " ");
        next = std::regex_replace(next, comment, " ");
        next = std::regex_replace(next, tag, " ");
        next = std::regex_replace(next, url, " ");
        next = std::regex_replace(next, citation, "");
        if (next == text) break;
        text = std::move(next);
    }
    return text;
}

std::string collapse_whitespace(std::string_view text) {
    std::vector<std::string> lines;
    std::string current;
    bool pending_space = false;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
            pending_space = false;
        } else if (c == ' ') {
            pending_space = !current.empty();
        } else {
            if (pending_space) current.push_back(' ');
            pending_space = false;
            current.push_back(c);
        }
    }
    lines.push_back(std::move(current));

    // at most one empty line between paragraphs, none at either end
    std::string out;
    bool blank_pending = false;
    for (auto& line : lines) {
        if (line.empty()) {
            blank_pending = !out.empty();
            continue;
        }
        if (!out.empty()) out += blank_pending ? "\n\n" : "\n";
        blank_pending = false;
        out += line;
    }
    return out;
}

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\n' || text[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\n' && text[i] != '\t') ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

bool is_closer(char32_t c) {
    switch (c) {
        case U'"': case U'\'': case U')': case U']': case U'}':
        case U'”': case U'’': case U'»': case U'›':
            return true;
        default:
            return false;
    }
}

bool is_opener(char32_t c) {
    switch (c) {
        case U'"': case U'\'': case U'(': case U'[': case U'{':
        case U'“': case U'„': case U'‘': case U'‚': case U'«': case U'‹':
            return true;
        default:
            return false;
    }
}

bool ends_sentence(std::string_view word, const WordList& abbreviations, Language language) {
    std::u32string w = detail::to_u32(word);
    while (!w.empty() && is_closer(w.back())) w.pop_back();
    if (w.empty()) return false;
    char32_t last = w.back();
    if (last == U'!' || last == U'?' || last == U'…') return true;
    if (last != U'.') return false;
    std::size_t start = 0;
    while (start < w.size() && is_opener(w[start])) ++start;
    std::string bare = lowercase(detail::to_utf8(std::u32string_view(w).substr(start)), language);
    return !abbreviations.contains(bare);
}

std::u32string strip_boundary(std::u32string w) {
    std::size_t start = 0;
    while (start < w.size() && !u_isalnum(static_cast<UChar32>(w[start]))) ++start;
    std::size_t end = w.size();
    while (end > start && !u_isalnum(static_cast<UChar32>(w[end - 1]))) --end;
    return w.substr(start, end - start);
}

bool has_letter(const std::u32string& w) {
    for (char32_t c : w) {
        if (u_isalpha(static_cast<UChar32>(c))) return true;
    }
    return false;
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

}  // namespace

RawSubmissionText::RawSubmissionText(std::string content, Language declared_language, std::string source_id)
    : content_(std::move(content)), language_(declared_language), source_id_(std::move(source_id)) {
    if (content_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "submission text is empty");
    }
}

WordList::WordList(std::set<std::string> entries, Language language) : language_(language) {
    for (const auto& e : entries) {
        std::string lower = lowercase(e, language);
        if (!lower.empty()) entries_.insert(lower);
    }
    lookup_.insert(entries_.begin(), entries_.end());
    std::string joined;
    for (const auto& e : entries_) {
        joined += e;
        joined += '\n';
    }
    hash_ = sha256_hex(joined);
}

WordList WordList::parse(std::string_view text, Language language) {
    if (!detail::decode_utf8(text)) {
        throw Error(ErrorCode::InvalidEncoding, "word list is not valid UTF-8");
    }
    std::set<std::string> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        entries.insert(t);
    }
    return WordList(std::move(entries), language);
}

WordList WordList::load(const std::filesystem::path& path, Language language) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::UnsupportedLanguage,
                    "no resource file for language " + std::string(to_string(language)) + ": " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), language);
}

bool WordList::contains(std::string_view lowercase_word) const {
    return lookup_.find(lowercase_word) != lookup_.end();
}

StopwordList::StopwordList(WordList words) : words_(std::move(words)) {
    for (const auto& w : words_.entries()) {
        stems_.insert(stem(w, words_.language()));
    }
}

LanguageResources LanguageResources::load(const std::filesystem::path& resource_dir, Language language) {
    std::string code(to_string(language));
    LanguageResources r;
    r.language = language;
    r.stopwords = StopwordList(WordList::load(resource_dir / "stopwords" / (code + ".txt"), language));
    r.abbreviations = WordList::load(resource_dir / "abbreviations" / (code + ".txt"), language);
    return r;
}

std::string lowercase(std::string_view text, Language language) {
    icu::UnicodeString u =
        icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    u.toLower(icu::Locale(locale_name(language)));
    std::string out;
    u.toUTF8String(out);
    return out;
}

std::size_t count_words(std::string_view text) { return split_words(text).size(); }

CleanText clean_text(const RawSubmissionText& raw, std::size_t min_words) {
    auto decoded = detail::decode_utf8(raw.content());
    if (!decoded) {
        throw Error(ErrorCode::InvalidEncoding, "submission is not valid UTF-8 text");
    }
    std::string text = normalize_characters(*decoded);
    text = strip_markup(std::move(text));
    text = nfc(text);
    text = collapse_whitespace(text);

    CleanText clean{std::move(text), raw.declared_language(), 0};
    clean.word_count = count_words(clean.text);
    if (clean.word_count < min_words) {
        throw Error(ErrorCode::TooShort, "text too short: " + std::to_string(clean.word_count) +
                                             " words, at least " + std::to_string(min_words) + " needed");
    }
    return clean;
}

std::vector<std::string> segment_sentences(const CleanText& clean, const WordList& abbreviations) {
    std::vector<std::string> sentences;
    std::string current;
    for (auto word : split_words(clean.text)) {
        if (!current.empty()) current.push_back(' ');
        current.append(word);
        if (ends_sentence(word, abbreviations, clean.language)) {
            sentences.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(std::move(current));
    return sentences;
}

TokenizedSentence tokenize_normalize(std::string_view sentence, Language language, const StopwordList& stopwords) {
    if (stopwords.language() != language) {
        throw Error(ErrorCode::UnsupportedLanguage,
                    "no stopword resources loaded for language " + std::string(to_string(language)));
    }
    TokenizedSentence out;
    for (auto word : split_words(sentence)) {
        std::u32string bare = strip_boundary(detail::to_u32(word));
        if (bare.empty() || !has_letter(bare)) continue;
        std::string surface = detail::to_utf8(bare);
        std::string lower = lowercase(surface, language);
        if (language == Language::EN) {
            // possessive 's
            for (std::string_view tail : {std::string_view("'s"), std::string_view("\xE2\x80\x99s")}) {
                if (lower.size() > tail.size() && lower.ends_with(tail)) {
                    lower.resize(lower.size() - tail.size());
                    surface.resize(surface.size() - tail.size());
                    break;
                }
            }
        }
        if (stopwords.is_stopword(lower)) continue;
        std::string s = stem(lower, language);
        if (detail::code_point_count(s) < 2 || stopwords.is_stopword_stem(s)) continue;
        out.tokens.push_back(Token{std::move(surface), std::move(s)});
    }
    return out;
}

std::vector<TokenizedSentence> analyze_text(const RawSubmissionText& raw, const LanguageResources& resources,
                                            std::size_t min_words) {
    if (raw.declared_language() != resources.language) {
        throw Error(ErrorCode::UnsupportedLanguage, "resources loaded for a different language");
    }
    CleanText clean = clean_text(raw, min_words);
    std::vector<TokenizedSentence> out;
    for (const auto& sentence : segment_sentences(clean, resources.abbreviations)) {
        out.push_back(tokenize_normalize(sentence, clean.language, resources.stopwords));
    }
    return out;
}

}  // namespace teccobot
