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

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mmcep/ontology.hpp"
#include "mmcep/rule_syntax.hpp"
#include "mmcep/rules.hpp"
#include "mmcep/text.hpp"

/// Declarative schema file. Grammar (docs/schema_format.md):
///
///   [classes]     Name [: Parent] [{ attr = {v1, v2} | attr = [lo, hi], ... }]
///   [rules]       see rule_syntax.hpp
///   [relations]   Name(RoleClassA, RoleClassB) -> rule
///   [detectable]  Class {, Class}
///   [extractable] Class.attr {, Class.attr}
///
/// `#` starts a comment. Sections may repeat and appear in any order; rules
/// are applied before relations so relations can name them.
namespace mmcep::schema_io {

struct SchemaBundle {
    ontology::OntologySchema schema;
    rules::RuleRegistry rules;
};

namespace detail {

struct Line {
    std::string_view text;
    std::size_t number;
    std::size_t offset;  // column offset of `text` within the source line
};

inline ontology::AttributeDomain parse_domain(text::Lexer& lx) {
    if (lx.accept("{")) {
        ontology::EnumDomain d;
        if (!lx.accept("}")) {
            do {
                d.values.insert(lx.word("enumeration value"));
            } while (lx.accept(","));
            lx.expect("}");
        }
        return d;
    }
    if (lx.accept("[")) {
        ontology::NumericRange r;
        r.lo = lx.number("range lower bound");
        lx.expect(",");
        const std::size_t col = lx.peek().column;
        r.hi = lx.number("range upper bound");
        if (r.hi < r.lo) lx.error_at(col, "range upper bound below lower bound");
        lx.expect("]");
        return r;
    }
    lx.error("expected '{' or '[' to start an attribute domain");
}

template <typename F>
void guarded(const Line& line, F&& f) {
    try {
        f();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.code(), line.number, line.offset + 1, e.message());
    }
}

}  // namespace detail

inline SchemaBundle parse_schema(std::string_view source) {
    std::map<std::string, std::vector<detail::Line>, std::less<>> sections;
    std::string current;
    const auto lines = text::split_lines(source);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view raw = text::strip_comment(lines[i]);
        const std::string_view body = text::trim(raw);
        if (body.empty()) continue;
        const std::size_t offset = static_cast<std::size_t>(body.data() - raw.data());
        if (body.front() == '[' && body.back() == ']') {
            current = std::string(text::trim(body.substr(1, body.size() - 2)));
            static const std::set<std::string, std::less<>> known{"classes", "relations", "detectable", "extractable", "rules"};
            if (!known.contains(current))
                throw ParseError(ErrorCode::ParseError, i + 1, offset + 1, "unknown section [" + current + "]");
            continue;
        }
        if (current.empty()) throw ParseError(ErrorCode::ParseError, i + 1, offset + 1, "entry outside of any section");
        sections[current].push_back({body, i + 1, offset});
    }

    SchemaBundle out;
    for (const auto& line : sections["classes"]) {
        text::Lexer lx(line.text, line.number, line.offset);
        std::string name = lx.ident("class name");
        std::optional<std::string> parent;
        if (lx.accept(":")) parent = lx.ident("parent class");
        ontology::AttributeSchema attrs;
        if (lx.accept("{")) {
            if (!lx.accept("}")) {
                do {
                    const std::size_t col = lx.peek().column;
                    std::string attr = lx.ident("attribute name");
                    lx.expect("=");
                    if (attrs.contains(attr)) lx.error_at(col, "duplicate attribute '" + attr + "'");
                    attrs.emplace(std::move(attr), detail::parse_domain(lx));
                } while (lx.accept(","));
                lx.expect("}");
            }
        }
        lx.expect_end();
        detail::guarded(line, [&] { out.schema.register_class(std::move(name), std::move(parent), std::move(attrs)); });
    }
    for (const auto& line : sections["rules"]) {
        auto rule = rules::syntax::parse_rule(line.text, line.number, line.offset);
        detail::guarded(line, [&] { out.rules.register_pattern(std::move(rule), out.schema); });
    }
    for (const auto& line : sections["relations"]) {
        text::Lexer lx(line.text, line.number, line.offset);
        std::string name = lx.ident("relation name");
        lx.expect("(");
        std::string a = lx.ident("role class");
        lx.expect(",");
        std::string b = lx.ident("role class");
        lx.expect(")");
        lx.expect("->");
        std::string rule = lx.ident("rule name");
        lx.expect_end();
        detail::guarded(line, [&] { out.schema.register_relation_class(std::move(name), {std::move(a), std::move(b)}, std::move(rule)); });
    }
    for (const auto& line : sections["detectable"]) {
        text::Lexer lx(line.text, line.number, line.offset);
        do {
            const std::string cls = lx.ident("class name");
            detail::guarded(line, [&] { out.schema.add_detectable(cls); });
        } while (lx.accept(","));
        lx.expect_end();
    }
    for (const auto& line : sections["extractable"]) {
        text::Lexer lx(line.text, line.number, line.offset);
        do {
            const std::string cls = lx.ident("class name");
            lx.expect(".");
            const std::string attr = lx.ident("attribute name");
            detail::guarded(line, [&] { out.schema.add_extractable_attribute(cls, attr); });
        } while (lx.accept(","));
        lx.expect_end();
    }
    return out;
}

inline SchemaBundle load_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open schema file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_schema(ss.str());
}

/// Canonical text form; parse_schema(save_schema(b)) reproduces `b`.
inline std::string save_schema(const ontology::OntologySchema& schema, const rules::RuleRegistry& registry) {
    std::ostringstream os;
    os.precision(17);
    os << "[classes]\n";
    // Parents before children.
    std::set<std::string, std::less<>> written;
    std::function<void(const std::string&)> emit = [&](const std::string& name) {
        if (written.contains(name)) return;
        const auto& node = schema.class_node(name);
        if (node.parent) emit(*node.parent);
        written.insert(name);
        os << node.name;
        if (node.parent) os << " : " << *node.parent;
        if (!node.attributes.empty()) {
            os << " { ";
            bool first = true;
            for (const auto& [attr, domain] : node.attributes) {
                if (!first) os << ", ";
                first = false;
                os << attr << " = ";
                if (const auto* e = std::get_if<ontology::EnumDomain>(&domain)) {
                    os << '{';
                    bool f2 = true;
                    for (const auto& v : e->values) {
                        if (!f2) os << ", ";
                        f2 = false;
                        os << v;
                    }
                    os << '}';
                } else {
                    const auto& r = std::get<ontology::NumericRange>(domain);
                    os << '[' << r.lo << ", " << r.hi << ']';
                }
            }
            os << " }";
        }
        os << '\n';
    };
    for (const auto& name : schema.class_order()) emit(name);

    const auto patterns = registry.patterns();
    if (!patterns.empty()) {
        os << "\n[rules]\n";
        for (const auto* p : patterns) os << rules::syntax::to_string(*p) << '\n';
    }
    if (!schema.relation_order().empty()) {
        os << "\n[relations]\n";
        for (const auto& name : schema.relation_order()) {
            const auto& r = schema.relation(name);
            os << r.name << '(' << r.roles.first << ", " << r.roles.second << ") -> " << r.rule << '\n';
        }
    }
    if (!schema.detectable().empty()) {
        os << "\n[detectable]\n";
        bool first = true;
        for (const auto& c : schema.detectable()) {
            os << (first ? "" : ", ") << c;
            first = false;
        }
        os << '\n';
    }
    if (!schema.extractable().empty()) {
        os << "\n[extractable]\n";
        bool first = true;
        for (const auto& [c, a] : schema.extractable()) {
            os << (first ? "" : ", ") << c << '.' << a;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

/// The traffic ontology used by the samples and the synthetic scenarios.
inline constexpr std::string_view kTrafficSchema = R"(# Traffic event ontology
[classes]
Vehicle
Car : Vehicle { color = {black, blue, red, silver, white}, type = {SUV, hatchback, sedan} }
Bike : Vehicle { color = {black, blue, red, silver, white} }
Truck : Vehicle
Person
Slot

[relations]
Overtake(Vehicle, Vehicle) -> overtake
ParkingLotFull(Car, Slot) -> parking

[detectable]
Car, Bike, Truck, Person

[extractable]
Car.color, Car.type, Bike.color
)";

inline SchemaBundle traffic_schema() { return parse_schema(kTrafficSchema); }

}  // namespace mmcep::schema_io
