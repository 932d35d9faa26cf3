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

#include "teccobot/stemmer.hpp"

#include <algorithm>
#include <array>
#include <initializer_list>
#include <optional>

#include "utf8.hpp"

namespace teccobot {
namespace {

using Word = std::u32string;

bool ends_with(const Word& w, std::u32string_view suffix) {
    return w.size() >= suffix.size() &&
           std::u32string_view(w).substr(w.size() - suffix.size()) == suffix;
}

bool ends_with_at(const Word& w, std::size_t end, std::u32string_view suffix) {
    return end >= suffix.size() &&
           std::u32string_view(w).substr(end - suffix.size(), suffix.size()) == suffix;
}

/// Longest entry of `suffixes` that `w` ends with.
std::optional<std::u32string_view> longest_suffix(const Word& w,
                                                  std::initializer_list<std::u32string_view> suffixes) {
    std::optional<std::u32string_view> best;
    for (auto s : suffixes) {
        if (ends_with(w, s) && (!best || s.size() > best->size())) {
            best = s;
        }
    }
    return best;
}

void replace_suffix(Word& w, std::size_t length, std::u32string_view with) {
    w.resize(w.size() - length);
    w.append(with);
}

template <typename IsVowel>
std::size_t region_after(const Word& w, std::size_t start, IsVowel is_vowel) {
    std::size_t i = start;
    while (i < w.size() && !is_vowel(w[i])) ++i;
    if (i >= w.size()) return w.size();
    ++i;
    while (i < w.size() && is_vowel(w[i])) ++i;
    if (i >= w.size()) return w.size();
    return i + 1;
}

// ---------------------------------------------------------------- English

bool en_vowel(char32_t c) {
    return c == U'a' || c == U'e' || c == U'i' || c == U'o' || c == U'u' || c == U'y';
}

/// consonant-vowel-consonant ending at `end`, last consonant not w, x or Y.
bool en_short_vowel(const Word& w, std::size_t end) {
    if (end < 3) return false;
    char32_t c3 = w[end - 1];
    if (en_vowel(c3) || c3 == U'w' || c3 == U'x' || c3 == U'Y') return false;
    return en_vowel(w[end - 2]) && !en_vowel(w[end - 3]);
}

class PorterStemmer {
public:
    explicit PorterStemmer(Word w) : w_(std::move(w)) {}

    Word run() {
        bool y_found = mark_y();
        p1_ = region_after(w_, 0, en_vowel);
        p2_ = region_after(w_, p1_, en_vowel);
        step_1a();
        step_1b();
        step_1c();
        step_2();
        step_3();
        step_4();
        step_5a();
        step_5b();
        if (y_found) {
            std::replace(w_.begin(), w_.end(), U'Y', U'y');
        }
        return std::move(w_);
    }

private:
    bool mark_y() {
        bool found = false;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            if (w_[i] == U'y' && (i == 0 || en_vowel(w_[i - 1]))) {
                w_[i] = U'Y';
                found = true;
            }
        }
        return found;
    }

    bool in_r1(std::size_t pos) const { return p1_ <= pos; }
    bool in_r2(std::size_t pos) const { return p2_ <= pos; }

    void step_1a() {
        auto s = longest_suffix(w_, {U"s", U"ies", U"sses", U"ss"});
        if (!s) return;
        if (*s == U"sses") replace_suffix(w_, 4, U"ss");
        else if (*s == U"ies") replace_suffix(w_, 3, U"i");
        else if (*s == U"s") replace_suffix(w_, 1, U"");
    }

    void step_1b() {
        auto s = longest_suffix(w_, {U"ed", U"eed", U"ing"});
        if (!s) return;
        std::size_t start = w_.size() - s->size();
        if (*s == U"eed") {
            if (in_r1(start)) replace_suffix(w_, 3, U"ee");
            return;
        }
        bool has_vowel = std::any_of(w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(start), en_vowel);
        if (!has_vowel) return;
        w_.resize(start);
        if (ends_with(w_, U"at") || ends_with(w_, U"bl") || ends_with(w_, U"iz")) {
            w_.push_back(U'e');
            return;
        }
        static constexpr std::array<std::u32string_view, 9> doubles = {
            U"bb", U"dd", U"ff", U"gg", U"mm", U"nn", U"pp", U"rr", U"tt"};
        for (auto d : doubles) {
            if (ends_with(w_, d)) {
                w_.pop_back();
                return;
            }
        }
        if (w_.size() == p1_ && en_short_vowel(w_, w_.size())) {
            w_.push_back(U'e');
        }
    }

    void step_1c() {
        if (w_.empty()) return;
        char32_t last = w_.back();
        if (last != U'y' && last != U'Y') return;
        std::size_t pos = w_.size() - 1;
        if (std::any_of(w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(pos), en_vowel)) {
            w_[pos] = U'i';
        }
    }

    struct Rule {
        std::u32string_view suffix;
        std::u32string_view replacement;
    };

    template <std::size_t N>
    void apply_rules(const std::array<Rule, N>& rules) {
        const Rule* best = nullptr;
        for (const auto& r : rules) {
            if (ends_with(w_, r.suffix) && (!best || r.suffix.size() > best->suffix.size())) {
                best = &r;
            }
        }
        if (best && in_r1(w_.size() - best->suffix.size())) {
            replace_suffix(w_, best->suffix.size(), best->replacement);
        }
    }

    void step_2() {
        static constexpr std::array<Rule, 20> rules = {{
            {U"anci", U"ance"},   {U"enci", U"ence"},    {U"abli", U"able"},   {U"eli", U"e"},
            {U"alli", U"al"},     {U"ousli", U"ous"},    {U"entli", U"ent"},   {U"aliti", U"al"},
            {U"biliti", U"ble"},  {U"iviti", U"ive"},    {U"tional", U"tion"}, {U"ational", U"ate"},
            {U"alism", U"al"},    {U"ation", U"ate"},    {U"ization", U"ize"}, {U"izer", U"ize"},
            {U"ator", U"ate"},    {U"iveness", U"ive"},  {U"fulness", U"ful"}, {U"ousness", U"ous"},
        }};
        apply_rules(rules);
    }

    void step_3() {
        static constexpr std::array<Rule, 7> rules = {{
            {U"icate", U"ic"}, {U"ative", U""}, {U"alize", U"al"}, {U"iciti", U"ic"},
            {U"ical", U"ic"},  {U"ful", U""},   {U"ness", U""},
        }};
        apply_rules(rules);
    }

    void step_4() {
        auto s = longest_suffix(w_, {U"ic", U"ance", U"ence", U"able", U"ible", U"ate", U"ive",
                                     U"ize", U"iti", U"al", U"ism", U"ion", U"er", U"ous",
                                     U"ant", U"ent", U"ment", U"ement", U"ou"});
        if (!s) return;
        std::size_t start = w_.size() - s->size();
        if (!in_r2(start)) return;
        if (*s == U"ion") {
            if (start == 0 || (w_[start - 1] != U's' && w_[start - 1] != U't')) return;
        }
        w_.resize(start);
    }

    void step_5a() {
        if (w_.empty() || w_.back() != U'e') return;
        std::size_t pos = w_.size() - 1;
        if (in_r2(pos) || (in_r1(pos) && !en_short_vowel(w_, pos))) {
            w_.pop_back();
        }
    }

    void step_5b() {
        if (w_.size() < 2 || w_.back() != U'l') return;
        std::size_t pos = w_.size() - 1;
        if (in_r2(pos) && w_[pos - 1] == U'l') {
            w_.pop_back();
        }
    }

    Word w_;
    std::size_t p1_ = 0;
    std::size_t p2_ = 0;
};

// ----------------------------------------------------------------- German

bool de_vowel(char32_t c) {
    switch (c) {
        case U'a': case U'e': case U'i': case U'o': case U'u': case U'y':
        case U'ä': case U'ö': case U'ü':
            return true;
        default:
            return false;
    }
}

bool in_set(char32_t c, std::u32string_view set) {
    return set.find(c) != std::u32string_view::npos;
}

class GermanStemmer {
public:
    explicit GermanStemmer(Word w) : w_(std::move(w)) {}

    Word run() {
        prelude();
        mark_regions();
        step_1();
        step_2();
        step_3();
        step_4();
        postlude();
        return std::move(w_);
    }

private:
    void prelude() {
        // u and y between vowels act as consonants
        for (std::size_t i = 1; i + 1 < w_.size(); ++i) {
            if ((w_[i] == U'u' || w_[i] == U'y') && de_vowel(w_[i - 1]) && de_vowel(w_[i + 1])) {
                w_[i] = w_[i] == U'u' ? U'U' : U'Y';
            }
        }
        Word out;
        out.reserve(w_.size() + 2);
        for (std::size_t i = 0; i < w_.size(); ++i) {
            char32_t c = w_[i];
            char32_t next = i + 1 < w_.size() ? w_[i + 1] : 0;
            if (c == U'q' && next == U'u') {
                out += U"qu";
                ++i;
            } else if (c == U'ß') {
                out += U"ss";
            } else if (next == U'e' && (c == U'a' || c == U'o' || c == U'u')) {
                out.push_back(c == U'a' ? U'ä' : c == U'o' ? U'ö' : U'ü');
                ++i;
            } else {
                out.push_back(c);
            }
        }
        w_ = std::move(out);
    }

    void mark_regions() {
        p1_ = p2_ = w_.size();
        if (w_.size() < 3) return;
        std::size_t r1 = region_after(w_, 0, de_vowel);
        p1_ = std::max<std::size_t>(r1, 3);
        p2_ = region_after(w_, r1, de_vowel);
        if (r1 >= w_.size()) p1_ = p2_ = w_.size();
    }

    bool in_r1(std::size_t pos) const { return p1_ <= pos; }
    bool in_r2(std::size_t pos) const { return p2_ <= pos; }

    void step_1() {
        auto s = longest_suffix(w_, {U"e", U"em", U"en", U"erinnen", U"erin", U"ln", U"ern", U"er",
                                     U"s", U"es", U"lns"});
        if (!s) return;
        std::size_t start = w_.size() - s->size();
        if (!in_r1(start)) return;
        if (*s == U"em") {
            if (!ends_with_at(w_, start, U"syst")) w_.resize(start);
        } else if (*s == U"erinnen" || *s == U"erin" || *s == U"ern" || *s == U"er") {
            w_.resize(start);
        } else if (*s == U"e" || *s == U"en" || *s == U"es") {
            w_.resize(start);
            if (ends_with(w_, U"niss")) w_.pop_back();
        } else if (*s == U"s") {
            if (start > 0 && in_set(w_[start - 1], U"bdfghklmnrt")) w_.resize(start);
        } else {  // ln, lns
            replace_suffix(w_, s->size(), U"l");
        }
    }

    void step_2() {
        auto s = longest_suffix(w_, {U"en", U"er", U"et", U"st", U"est"});
        if (!s) return;
        std::size_t start = w_.size() - s->size();
        if (!in_r1(start)) return;
        if (*s == U"st") {
            if (start >= 4 && in_set(w_[start - 1], U"bdfghklmnt")) w_.resize(start);
        } else if (*s == U"et") {
            if (start == 0 || !in_set(w_[start - 1], U"Udfgklmnrstzä")) return;
            for (auto blocked : {U"tick", U"plan", U"geordn", U"intern", U"tr"}) {
                if (ends_with_at(w_, start, blocked)) return;
            }
            w_.resize(start);
        } else {
            w_.resize(start);
        }
    }

    void step_3() {
        auto s = longest_suffix(w_, {U"end", U"ig", U"ung", U"lich", U"isch", U"ik", U"heit", U"keit"});
        if (!s) return;
        std::size_t start = w_.size() - s->size();
        if (!in_r2(start)) return;
        if (*s == U"end" || *s == U"ung") {
            w_.resize(start);
            if (ends_with(w_, U"ig")) {
                std::size_t t = w_.size() - 2;
                if ((t == 0 || w_[t - 1] != U'e') && in_r2(t)) w_.resize(t);
            }
        } else if (*s == U"ig" || *s == U"ik" || *s == U"isch") {
            if (start == 0 || w_[start - 1] != U'e') w_.resize(start);
        } else if (*s == U"lich" || *s == U"heit") {
            w_.resize(start);
            if (ends_with(w_, U"er") || ends_with(w_, U"en")) {
                std::size_t t = w_.size() - 2;
                if (in_r1(t)) w_.resize(t);
            }
        } else {  // keit
            w_.resize(start);
            auto tail = longest_suffix(w_, {U"ig", U"lich"});
            if (tail) {
                std::size_t t = w_.size() - tail->size();
                if (in_r2(t)) w_.resize(t);
            }
        }
    }

    void step_4() {
        auto s = longest_suffix(w_, {U"'", U"'sch", U"'s"});
        if (!s) return;
        std::size_t start = w_.size() - s->size();
        if (start >= 2) w_.resize(start);
    }

    void postlude() {
        for (auto& c : w_) {
            switch (c) {
                case U'Y': c = U'y'; break;
                case U'U': c = U'u'; break;
                case U'ä': c = U'a'; break;
                case U'ö': c = U'o'; break;
                case U'ü': c = U'u'; break;
                default: break;
            }
        }
    }

    Word w_;
    std::size_t p1_ = 0;
    std::size_t p2_ = 0;
};

}  // namespace

std::string stem_english(std::string_view word) {
    return detail::to_utf8(PorterStemmer(detail::to_u32(word)).run());
}

std::string stem_german(std::string_view word) {
    return detail::to_utf8(GermanStemmer(detail::to_u32(word)).run());
}

std::string stem(std::string_view word, Language language) {
    return language == Language::EN ? stem_english(word) : stem_german(word);
}

}  // namespace teccobot
