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

// Text pipeline: raw submission -> clean text -> sentences -> normalized
// tokens. Every function here is pure and thread-safe.

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "teccobot/language.hpp"

namespace teccobot {

inline constexpr std::size_t kDefaultMinWords = 300;

class RawSubmissionText {
public:
    /// Throws Error(InvalidArgument) when `content` is empty.
    RawSubmissionText(std::string content, Language declared_language, std::string source_id);

    const std::string& content() const noexcept { return content_; }
    Language declared_language() const noexcept { return language_; }
    const std::string& source_id() const noexcept { return source_id_; }

private:
    std::string content_;
    Language language_;
    std::string source_id_;
};

struct CleanText {
    std::string text;
    Language language = Language::EN;
    std::size_t word_count = 0;

    bool operator==(const CleanText&) const = default;
};

struct Token {
    std::string surface;
    std::string stem;

    bool operator==(const Token&) const = default;
};

struct TokenizedSentence {
    std::vector<Token> tokens;

    bool operator==(const TokenizedSentence&) const = default;
};

/// A versioned word list file: UTF-8, one entry per line, '#' comments.
/// Entries are stored lowercased.
class WordList {
public:
    WordList() = default;
    WordList(std::set<std::string> entries, Language language);

    /// Throws Error(UnsupportedLanguage) if the file does not exist,
    /// Error(InvalidEncoding) if it is not UTF-8.
    static WordList load(const std::filesystem::path& path, Language language);
    static WordList parse(std::string_view text, Language language);

    bool contains(std::string_view lowercase_word) const;
    const std::set<std::string>& entries() const noexcept { return entries_; }
    Language language() const noexcept { return language_; }

    /// SHA-256 over the sorted entries joined by '\n'.
    const std::string& content_hash() const noexcept { return hash_; }

private:
    std::set<std::string, std::less<>> lookup_;
    std::set<std::string> entries_;
    Language language_ = Language::EN;
    std::string hash_;
};

/// Stopwords plus the stems of every stopword, so that no emitted stem can
/// coincide with a stopword's stem.
class StopwordList {
public:
    StopwordList() = default;
    explicit StopwordList(WordList words);

    bool is_stopword(std::string_view lowercase_word) const { return words_.contains(lowercase_word); }
    bool is_stopword_stem(const std::string& stem) const { return stems_.count(stem) != 0; }
    Language language() const noexcept { return words_.language(); }
    const std::string& content_hash() const noexcept { return words_.content_hash(); }
    const WordList& words() const noexcept { return words_; }

private:
    WordList words_;
    std::set<std::string> stems_;
};

/// Per-language resources loaded from a resource directory laid out as
/// stopwords/<lang>.txt and abbreviations/<lang>.txt.
struct LanguageResources {
    Language language = Language::EN;
    StopwordList stopwords;
    WordList abbreviations;

    static LanguageResources load(const std::filesystem::path& resource_dir, Language language);
};

/// Locale-aware lowercase of UTF-8 text.
std::string lowercase(std::string_view text, Language language);

std::size_t count_words(std::string_view text);

/// Strips markup, URLs and bracketed citation markers, drops control
/// characters, NFC-normalizes and collapses whitespace within lines.
/// Throws Error(InvalidEncoding) or Error(TooShort).
CleanText clean_text(const RawSubmissionText& raw, std::size_t min_words = kDefaultMinWords);

/// Splits after '.', '!' or '?' at a word end, except after a listed
/// abbreviation. Sentences are the input words re-joined by single spaces.
std::vector<std::string> segment_sentences(const CleanText& clean, const WordList& abbreviations);

/// Lowercases, strips boundary punctuation, drops stopwords and stems.
/// Throws Error(UnsupportedLanguage) if `stopwords` is for another language.
TokenizedSentence tokenize_normalize(std::string_view sentence, Language language,
                                     const StopwordList& stopwords);

/// clean -> segment -> tokenize for one submission.
std::vector<TokenizedSentence> analyze_text(const RawSubmissionText& raw, const LanguageResources& resources,
                                            std::size_t min_words = kDefaultMinWords);

}  // namespace teccobot
