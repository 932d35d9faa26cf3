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

#include <functional>

#include "teccobot/auth.hpp"
#include "teccobot/error.hpp"

namespace teccobot {
namespace {

using std::chrono::seconds;

const SystemTime kNow = SystemTime(seconds(1'800'000'000));

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

std::string segment(const std::string& json) { return base64url_encode(to_bytes(json)); }

TEST(AuthTest, IssuedTokenVerifies) {
    IssuerKeys issuer = IssuerKeys::generate();
    std::string token = issue_token(issuer, "student-7", kNow + seconds(60));
    AccessToken t = verify_token(token, issuer.public_key, kNow);
    EXPECT_EQ(t.subject, "student-7");
    EXPECT_EQ(t.expires_at, 1'800'000'060);
    EXPECT_EQ(std::count(token.begin(), token.end(), '.'), 2);
}

TEST(AuthTest, ExpiryIsExclusive) {
    IssuerKeys issuer = IssuerKeys::generate();
    std::string token = issue_token(issuer, "s", kNow + seconds(10));
    EXPECT_NO_THROW(verify_token(token, issuer.public_key, kNow + seconds(9)));
    EXPECT_EQ(code_of([&] { verify_token(token, issuer.public_key, kNow + seconds(10)); }), ErrorCode::TokenExpired);
}

TEST(AuthTest, OtherIssuerIsRejected) {
    IssuerKeys issuer = IssuerKeys::generate();
    IssuerKeys other = IssuerKeys::generate();
    std::string token = issue_token(other, "s", kNow + seconds(60));
    EXPECT_EQ(code_of([&] { verify_token(token, issuer.public_key, kNow); }), ErrorCode::TokenInvalid);
}

TEST(AuthTest, TamperedClaimsAreRejected) {
    IssuerKeys issuer = IssuerKeys::generate();
    std::string token = issue_token(issuer, "alice", kNow + seconds(60));
    auto first = token.find('.');
    auto second = token.find('.', first + 1);
    std::string forged = token.substr(0, first + 1) + segment(R"({"exp":1800000060,"sub":"bob"})") +
                         token.substr(second);
    EXPECT_EQ(code_of([&] { verify_token(forged, issuer.public_key, kNow); }), ErrorCode::TokenInvalid);
}

TEST(AuthTest, UnsignedAndMalformedTokensAreRejected) {
    IssuerKeys issuer = IssuerKeys::generate();
    std::string none = segment(R"({"alg":"none","typ":"JWT"})") + "." + segment(R"({"exp":1900000000,"sub":"s"})") + ".";
    for (const std::string& raw : {none, std::string(), std::string("abc"), std::string("a.b.c"),
                                   std::string("..."), std::string("a..b")}) {
        EXPECT_EQ(code_of([&] { verify_token(raw, issuer.public_key, kNow); }), ErrorCode::TokenInvalid) << raw;
    }
}

TEST(AuthTest, MissingClaimsAreRejected) {
    IssuerKeys issuer = IssuerKeys::generate();
    std::string token = issue_token(issuer, "", kNow + seconds(60));
    EXPECT_EQ(code_of([&] { verify_token(token, issuer.public_key, kNow); }), ErrorCode::TokenInvalid);
}

}  // namespace
}  // namespace teccobot
