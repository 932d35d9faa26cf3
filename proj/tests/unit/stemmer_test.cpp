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

#include <gtest/gtest.h>

#include <fstream>
#include <string>
#include <vector>

#include "teccobot/stemmer.hpp"

namespace teccobot {
namespace {

struct GoldenPair {
    std::string word;
    std::string stem;
};

// Golden files come from tests/oracles/gen_stem_golden.py.
std::vector<GoldenPair> load_golden(const std::string& name) {
    std::ifstream in(std::string(TECCOBOT_TEST_DATA_DIR) + "/" + name);
    std::vector<GoldenPair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        out.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return out;
}

TEST(StemmerTest, EnglishMatchesGoldenFile) {
    auto golden = load_golden("stem_en.tsv");
    ASSERT_GT(golden.size(), 400u);
    for (const auto& [word, expected] : golden) {
        EXPECT_EQ(stem_english(word), expected) << "word: " << word;
    }
}

TEST(StemmerTest, GermanMatchesGoldenFile) {
    auto golden = load_golden("stem_de.tsv");
    ASSERT_GT(golden.size(), 300u);
    for (const auto& [word, expected] : golden) {
        EXPECT_EQ(stem_german(word), expected) << "word: " << word;
    }
}

TEST(StemmerTest, PipelineExampleStems) {
    EXPECT_EQ(stem_english("chased"), "chase");
    EXPECT_EQ(stem_english("dogs"), "dog");
    EXPECT_EQ(stem_english("cat"), "cat");
}

TEST(StemmerTest, ShortAndEmptyWordsPassThrough) {
    EXPECT_EQ(stem_english(""), "");
    EXPECT_EQ(stem_english("a"), "a");
    EXPECT_EQ(stem_german(""), "");
    EXPECT_EQ(stem_german("zu"), "zu");
}

TEST(StemmerTest, DispatchesOnLanguage) {
    EXPECT_EQ(stem("houses", Language::EN), stem_english("houses"));
    EXPECT_EQ(stem("häuser", Language::DE), "haus");
}

}  // namespace
}  // namespace teccobot
