/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mmcep/error.hpp"
#include "mmcep/ontology.hpp"

/// Tokenizer shared by the line-oriented text formats (schema, rule
/// definitions, queries, engine config). Columns are 1-based.
namespace mmcep::text {

enum class TokenKind { Ident, Number, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    std::size_t column = 0;
};

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Drops a trailing `#` comment.
inline std::string_view strip_comment(std::string_view s) noexcept {
    const auto pos = s.find('#');
    return pos == std::string_view::npos ? s : s.substr(0, pos);
}

inline std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto nl = s.find('\n', start);
        auto line = s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i]))) return false;
    return true;
}

class Lexer {
public:
    Lexer(std::string_view line, std::size_t line_no, std::size_t column_offset = 0)
        : line_(line), line_no_(line_no), offset_(column_offset) {
        tokenize();
    }

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    Token next() {
        Token t = peek();
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == TokenKind::End; }

    bool accept(std::string_view punct) {
        if (peek().kind == TokenKind::Punct && peek().text == punct) {
            next();
            return true;
        }
        return false;
    }
    bool accept_keyword(std::string_view kw) {
        if (peek().kind == TokenKind::Ident && iequals(peek().text, kw)) {
            next();
            return true;
        }
        return false;
    }

    void expect(std::string_view punct) {
        if (!accept(punct)) error("expected '" + std::string(punct) + "'");
    }
    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) error("expected keyword " + std::string(kw));
    }
    std::string ident(std::string_view what = "identifier") {
        if (peek().kind != TokenKind::Ident) error("expected " + std::string(what));
        return next().text;
    }
    double number(std::string_view what = "number") {
        if (peek().kind != TokenKind::Number) error("expected " + std::string(what));
        const Token t = next();
        const auto v = ontology::parse_number(t.text);
        if (!v) error_at(t.column, "malformed number '" + t.text + "'");
        return *v;
    }
    std::int64_t integer(std::string_view what = "integer") {
        const Token& t = peek();
        const std::size_t col = t.column;
        const double v = number(what);
        if (v != static_cast<double>(static_cast<std::int64_t>(v))) error_at(col, "expected an integer");
        return static_cast<std::int64_t>(v);
    }
    /// Identifier or number, as text (attribute values may be either).
    std::string word(std::string_view what = "value") {
        if (peek().kind != TokenKind::Ident && peek().kind != TokenKind::Number) error("expected " + std::string(what));
        return next().text;
    }
    void expect_end() {
        if (!at_end()) error("unexpected '" + peek().text + "'");
    }

    [[noreturn]] void error(const std::string& what) const { error_at(peek().column, what); }
    [[noreturn]] void error_at(std::size_t column, const std::string& what) const {
        throw ParseError(ErrorCode::ParseError, line_no_, column, what);
    }

    std::size_t line_no() const noexcept { return line_no_; }

private:
    void tokenize() {
        std::size_t i = 0;
        const std::string_view s = line_;
        auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
        auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; };
        while (i < s.size()) {
            const char c = s[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            const std::size_t col = offset_ + i + 1;
            const bool signed_number = (c == '-' || c == '+') && i + 1 < s.size() &&
                                       (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '.');
            if (std::isdigit(static_cast<unsigned char>(c)) || signed_number ||
                (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
                std::size_t j = i + 1;
                while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                                        ((s[j] == '-' || s[j] == '+') && (s[j - 1] == 'e' || s[j - 1] == 'E'))))
                    ++j;
                tokens_.push_back({TokenKind::Number, std::string(s.substr(i, j - i)), col});
                i = j;
            } else if (is_ident_start(c)) {
                std::size_t j = i + 1;
                while (j < s.size() && is_ident(s[j])) ++j;
                tokens_.push_back({TokenKind::Ident, std::string(s.substr(i, j - i)), col});
                i = j;
            } else {
                static constexpr std::string_view two[] = {"<=", ">=", "!=", "->", "=="};
                bool matched = false;
                for (auto t : two) {
                    if (s.substr(i, 2) == t) {
                        tokens_.push_back({TokenKind::Punct, std::string(t), col});
                        i += 2;
                        matched = true;
                        break;
                    }
                }
                if (matched) continue;
                static constexpr std::string_view single = "(){}[],=:;@$<>!.";
                if (single.find(c) == std::string_view::npos) error_at(col, std::string("unexpected character '") + c + "'");
                tokens_.push_back({TokenKind::Punct, std::string(1, c), col});
                ++i;
            }
        }
        tokens_.push_back({TokenKind::End, "", offset_ + s.size() + 1});
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t offset_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace mmcep::text
