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

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmcep/error.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/ontology.hpp"
#include "mmcep/rules.hpp"
#include "mmcep/text.hpp"

namespace mmcep::query {

/// COUNT n [SLIDE s]; tumbling when slide == n.
struct CountWindow {
    std::int64_t size = 5;
    std::int64_t slide = 5;

    friend bool operator==(const CountWindow&, const CountWindow&) = default;
};

/// TIME d: tumbling windows [k*d, (k+1)*d) in stream time.
struct TimeWindow {
    std::int64_t duration_ms = 1000;

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// ABS tm tn: the single window tm <= t <= tn.
struct AbsoluteWindow {
    graph::TimestampMs start_ms = 0;
    graph::TimestampMs end_ms = 0;

    friend bool operator==(const AbsoluteWindow&, const AbsoluteWindow&) = default;
};

using WindowSpec = std::variant<CountWindow, TimeWindow, AbsoluteWindow>;

inline void validate(const WindowSpec& w) {
    if (const auto* c = std::get_if<CountWindow>(&w)) {
        if (c->size < 1) fail(ErrorCode::ValidationError, "count window size must be >= 1");
        if (c->slide < 1) fail(ErrorCode::ValidationError, "count window slide must be >= 1");
    } else if (const auto* t = std::get_if<TimeWindow>(&w)) {
        if (t->duration_ms <= 0) fail(ErrorCode::ValidationError, "time window duration must be positive");
    } else {
        const auto& a = std::get<AbsoluteWindow>(w);
        if (!(a.start_ms < a.end_ms)) fail(ErrorCode::ValidationError, "absolute window needs tm < tn");
    }
}

struct ObjectSpec {
    std::string class_label;
    std::vector<graph::AttributePredicate> predicates;

    friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

struct RelationSpec {
    std::string relation;
    std::string class_a;
    std::string class_b;
    std::optional<double> threshold;  // parking overlap threshold override

    friend bool operator==(const RelationSpec&, const RelationSpec&) = default;
};

struct Query {
    std::string id;
    std::string subscriber;
    std::vector<ObjectSpec> objects;
    std::optional<RelationSpec> relation;
    WindowSpec window = CountWindow{};
    std::vector<std::string> publishers;

    friend bool operator==(const Query&, const Query&) = default;
};

/// COUNT n [SLIDE s] | TIME ms | ABS tm tn, after the WINDOW keyword.
inline WindowSpec parse_window(text::Lexer& lx) {
    if (lx.accept_keyword("COUNT")) {
        CountWindow c;
        c.size = lx.integer("window size");
        c.slide = lx.accept_keyword("SLIDE") ? lx.integer("slide") : c.size;
        return c;
    }
    if (lx.accept_keyword("TIME")) return TimeWindow{lx.integer("duration")};
    if (lx.accept_keyword("ABS")) {
        AbsoluteWindow a;
        a.start_ms = lx.integer("window start");
        a.end_ms = lx.integer("window end");
        return a;
    }
    lx.error("expected COUNT, TIME or ABS");
}

/// Parses one query line:
///
///   QUERY id SUBSCRIBER sid clause {clause} [WINDOW w] FROM pub {, pub}
///   clause = OBJECT Class [WHERE attr=val {, attr=val}]
///          | PATTERN Relation(ClassA, ClassB) [THRESHOLD r]
///   w      = COUNT n [SLIDE s] | TIME ms | ABS tm tn
///
/// Keywords are case-insensitive. A missing WINDOW takes `default_window`.
inline Query parse_query(std::string_view line, const WindowSpec& default_window = CountWindow{},
                         std::size_t line_no = 1, std::size_t column_offset = 0) {
    text::Lexer lx(line, line_no, column_offset);
    Query q;
    lx.expect_keyword("QUERY");
    q.id = lx.word("query id");
    lx.expect_keyword("SUBSCRIBER");
    q.subscriber = lx.word("subscriber id");
    bool any_clause = false;
    while (true) {
        if (lx.accept_keyword("OBJECT")) {
            ObjectSpec o;
            o.class_label = lx.ident("object class");
            const bool bracket = lx.accept("[");
            if (lx.accept_keyword("WHERE")) {
                do {
                    graph::AttributePredicate p;
                    p.attribute = lx.ident("attribute name");
                    lx.expect("=");
                    p.value = lx.word("attribute value");
                    o.predicates.push_back(std::move(p));
                } while (lx.accept(","));
            }
            if (bracket) lx.expect("]");
            q.objects.push_back(std::move(o));
            any_clause = true;
        } else if (lx.accept_keyword("PATTERN")) {
            if (q.relation) lx.error("only one PATTERN clause per query");
            RelationSpec r;
            r.relation = lx.ident("relation name");
            lx.expect("(");
            r.class_a = lx.ident("role class");
            lx.expect(",");
            r.class_b = lx.ident("role class");
            lx.expect(")");
            if (lx.accept_keyword("THRESHOLD")) r.threshold = lx.number("threshold");
            q.relation = std::move(r);
            any_clause = true;
        } else {
            break;
        }
    }
    if (!any_clause) lx.error("expected OBJECT or PATTERN");
    q.window = default_window;
    if (lx.accept_keyword("WINDOW")) q.window = parse_window(lx);
    lx.expect_keyword("FROM");
    do {
        q.publishers.push_back(lx.word("publisher id"));
    } while (lx.accept(","));
    lx.expect_end();
    try {
        validate(q.window);
    } catch (const Error& e) {
        throw ParseError(ErrorCode::ValidationError, line_no, column_offset + 1, e.message());
    }
    return q;
}

inline std::string to_string(const WindowSpec& w) {
    std::ostringstream os;
    if (const auto* c = std::get_if<CountWindow>(&w)) {
        os << "COUNT " << c->size;
        if (c->slide != c->size) os << " SLIDE " << c->slide;
    } else if (const auto* t = std::get_if<TimeWindow>(&w)) {
        os << "TIME " << t->duration_ms;
    } else {
        const auto& a = std::get<AbsoluteWindow>(w);
        os << "ABS " << a.start_ms << ' ' << a.end_ms;
    }
    return os.str();
}

/// Canonical single-line form accepted by parse_query.
inline std::string to_string(const Query& q) {
    std::ostringstream os;
    os.precision(17);
    os << "QUERY " << q.id << " SUBSCRIBER " << q.subscriber;
    for (const auto& o : q.objects) {
        os << " OBJECT " << o.class_label;
        for (std::size_t i = 0; i < o.predicates.size(); ++i)
            os << (i ? "," : " WHERE ") << o.predicates[i].attribute << '=' << o.predicates[i].value;
    }
    if (q.relation) {
        os << " PATTERN " << q.relation->relation << '(' << q.relation->class_a << ',' << q.relation->class_b << ')';
        if (q.relation->threshold) os << " THRESHOLD " << *q.relation->threshold;
    }
    os << " WINDOW " << to_string(q.window) << " FROM ";
    for (std::size_t i = 0; i < q.publishers.size(); ++i) os << (i ? "," : "") << q.publishers[i];
    return os.str();
}

/// Checks a query against the schema and rule registry; publishers are
/// checked by the engine.
inline void validate(const Query& q, const ontology::OntologySchema& schema, const rules::RuleRegistry& registry) {
    auto bad = [&](const std::string& what) { fail(ErrorCode::ValidationError, "query '" + q.id + "': " + what); };
    if (q.id.empty()) bad("empty query id");
    if (q.objects.empty() && !q.relation) bad("needs an object or a relation clause");
    if (q.publishers.empty()) bad("needs at least one publisher");
    validate(q.window);
    for (const auto& o : q.objects) {
        if (!schema.has_class(o.class_label)) bad("unknown class '" + o.class_label + "'");
        for (const auto& p : o.predicates) {
            if (!schema.subtree_has_attribute(o.class_label, p.attribute))
                bad("class '" + o.class_label + "' has no attribute '" + p.attribute + "'");
            bool admitted = false;
            for (const auto& name : schema.class_order()) {
                if (!schema.is_subclass(name, o.class_label)) continue;
                if (const auto* d = schema.attribute_domain(name, p.attribute)) admitted = admitted || ontology::admits(*d, p.value);
            }
            if (!admitted) bad("value '" + p.value + "' is outside the domain of " + p.attribute);
        }
    }
    if (q.relation) {
        const auto& r = *q.relation;
        if (!schema.has_relation(r.relation)) bad("unknown relation '" + r.relation + "'");
        const auto& rel = schema.relation(r.relation);
        for (const auto* c : {&r.class_a, &r.class_b})
            if (!schema.has_class(*c)) bad("unknown class '" + *c + "'");
        if (!schema.is_subclass(r.class_a, rel.roles.first) || !schema.is_subclass(r.class_b, rel.roles.second))
            bad("roles (" + r.class_a + ", " + r.class_b + ") do not fit " + rel.name + "(" + rel.roles.first + ", " +
                rel.roles.second + ")");
        if (!registry.contains(rel.rule)) bad("relation '" + rel.name + "' names unknown rule '" + rel.rule + "'");
        if (r.threshold && !(*r.threshold > 0.0 && *r.threshold <= 1.0)) bad("threshold must lie in (0, 1]");
    }
}

}  // namespace mmcep::query
