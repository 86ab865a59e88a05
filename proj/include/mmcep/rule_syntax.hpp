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

#include <sstream>
#include <string>
#include <string_view>

#include "mmcep/rules.hpp"
#include "mmcep/text.hpp"

/// Text form of user-defined pattern rules, one rule per line:
///
///   name scope (var:Class, var:Class) [unordered] = body
///
/// scope is `frame`, `pair` or `window`; body is an s-expression, see
/// docs/rule_syntax.md.
namespace mmcep::rules::syntax {

namespace detail {

using temporal::BinaryOp;
using temporal::Comparison;
using temporal::ExprPtr;
using temporal::Term;
namespace expr = temporal::expr;

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::optional<spatial::TopologicalRelation> topo_from(std::string_view name) {
    for (auto r : spatial::kTopologicalRelations)
        if (lower(std::string(spatial::to_string(r))) == name) return r;
    return std::nullopt;
}

inline std::optional<spatial::Direction> direction_from(std::string_view name) {
    for (auto d : {spatial::Direction::Front, spatial::Direction::Back, spatial::Direction::Left, spatial::Direction::Right})
        if (spatial::to_string(d) == name) return d;
    return std::nullopt;
}

inline Term parse_term(text::Lexer& lx) {
    Term t;
    if (lx.accept("$")) {
        t.name = lx.ident("region name");
        t.region = true;
        return t;
    }
    t.name = lx.ident("variable");
    if (lx.accept("@")) t.time = static_cast<int>(lx.integer("frame offset"));
    return t;
}

inline spatial::SpatialPredicate parse_predicate(text::Lexer& lx) {
    if (lx.accept("(")) {
        const std::size_t col = lx.peek().column;
        const std::string head = lower(lx.ident("predicate form"));
        spatial::SpatialPredicate out;
        if (head == "back_axis" || head == "front_axis") {
            const double fx = lx.number();
            const double fy = lx.number();
            out = spatial::AxisProjection{head == "back_axis", spatial::Axis(fx, fy)};
        } else if (head == "fors") {
            const std::string d = lower(lx.ident("direction"));
            const auto dir = direction_from(d);
            if (!dir) lx.error_at(col, "unknown direction '" + d + "'");
            const double fx = lx.number();
            const double fy = lx.number();
            out = spatial::DirectionTest{*dir, spatial::Axis(fx, fy)};
        } else {
            lx.error_at(col, "unknown predicate form '" + head + "'");
        }
        lx.expect(")");
        return out;
    }
    const std::size_t col = lx.peek().column;
    const std::string name = lower(lx.ident("spatial predicate"));
    if (auto t = topo_from(name)) return *t;
    if (auto d = direction_from(name)) return spatial::DirectionTest{*d, {}};
    if (name == "back_x") return spatial::AxisProjection{true, spatial::Axis(1, 0)};
    if (name == "front_x") return spatial::AxisProjection{false, spatial::Axis(1, 0)};
    if (name == "back_y") return spatial::AxisProjection{true, spatial::Axis(0, 1)};
    if (name == "front_y") return spatial::AxisProjection{false, spatial::Axis(0, 1)};
    lx.error_at(col, "unknown spatial predicate '" + name + "'");
}

inline Comparison parse_comparison(text::Lexer& lx) {
    for (auto [tok, c] : {std::pair{"<=", Comparison::LessEqual}, std::pair{">=", Comparison::GreaterEqual},
                          std::pair{"!=", Comparison::NotEqual}, std::pair{"<", Comparison::Less},
                          std::pair{">", Comparison::Greater}, std::pair{"=", Comparison::Equal}}) {
        if (lx.accept(tok)) return c;
    }
    lx.error("expected a comparison operator");
}

inline ExprPtr parse_expr(text::Lexer& lx) {
    if (lx.accept_keyword("true")) return expr::constant(true);
    if (lx.accept_keyword("false")) return expr::constant(false);
    lx.expect("(");
    const std::size_t col = lx.peek().column;
    const std::string head = lower(lx.ident("operator"));
    ExprPtr out;
    auto binary = [&](BinaryOp op) {
        ExprPtr acc = parse_expr(lx);
        ExprPtr rhs = parse_expr(lx);
        acc = expr::binary(op, acc, rhs);
        // and/or are n-ary; fold left.
        while ((op == BinaryOp::And || op == BinaryOp::Or) && !(lx.peek().kind == text::TokenKind::Punct && lx.peek().text == ")"))
            acc = expr::binary(op, acc, parse_expr(lx));
        return acc;
    };
    if (head == "not") {
        out = expr::lnot(parse_expr(lx));
    } else if (head == "and") {
        out = binary(BinaryOp::And);
    } else if (head == "or") {
        out = binary(BinaryOp::Or);
    } else if (head == "nor") {
        out = binary(BinaryOp::Nor);
    } else if (head == "xor") {
        out = binary(BinaryOp::Xor);
    } else if (head == "xnor") {
        out = binary(BinaryOp::Xnor);
    } else if (head == "implies") {
        out = binary(BinaryOp::Implies);
    } else if (head == "iff") {
        out = binary(BinaryOp::Iff);
    } else if (head == "any" || head == "every") {
        std::string var = lx.ident("variable");
        std::string label = lx.ident("class");
        ExprPtr body = parse_expr(lx);
        out = head == "any" ? expr::any(var, label, body) : expr::every(var, label, body);
    } else if (head == "bsf") {
        auto pred = parse_predicate(lx);
        Term a = parse_term(lx);
        Term b = parse_term(lx);
        out = expr::spatial(pred, a, b);
    } else if (head == "msf") {
        const std::size_t kcol = lx.peek().column;
        const std::string kind = lower(lx.ident("metric"));
        spatial::MetricKind mk;
        if (kind == "distance") mk = spatial::MetricKind::Distance;
        else if (kind == "overlap_area") mk = spatial::MetricKind::OverlapArea;
        else if (kind == "overlap_ratio") mk = spatial::MetricKind::OverlapRatio;
        else lx.error_at(kcol, "unknown metric '" + kind + "'");
        Term a = parse_term(lx);
        Term b = parse_term(lx);
        const Comparison op = parse_comparison(lx);
        const double threshold = lx.number("threshold");
        out = expr::metric(mk, a, b, op, threshold);
    } else if (head == "allen") {
        const std::size_t rcol = lx.peek().column;
        const std::string rel = lower(lx.ident("Allen relation"));
        const auto r = temporal::parse_allen(rel);
        if (!r) lx.error_at(rcol, "unknown Allen relation '" + rel + "'");
        std::string a = lx.ident("variable");
        std::string b = lx.ident("variable");
        out = expr::allen(*r, a, b);
    } else {
        lx.error_at(col, "unknown operator '" + head + "'");
    }
    lx.expect(")");
    return out;
}

inline void print_term(std::ostream& os, const Term& t) {
    if (t.region) {
        os << '$' << t.name;
        return;
    }
    os << t.name;
    if (t.time != 0) os << '@' << t.time;
}

inline void print_predicate(std::ostream& os, const spatial::SpatialPredicate& p) {
    if (const auto* t = std::get_if<spatial::TopologicalRelation>(&p)) {
        os << lower(std::string(spatial::to_string(*t)));
    } else if (const auto* d = std::get_if<spatial::DirectionTest>(&p)) {
        os << "(fors " << spatial::to_string(d->dir) << ' ' << d->axis.raw_x() << ' ' << d->axis.raw_y() << ')';
    } else {
        const auto& a = std::get<spatial::AxisProjection>(p);
        os << (a.back ? "(back_axis " : "(front_axis ") << a.axis.raw_x() << ' ' << a.axis.raw_y() << ')';
    }
}

inline void print_expr(std::ostream& os, const temporal::Expr& e) {
    using namespace temporal;
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, ConstLeaf>) {
                os << (n.value ? "true" : "false");
            } else if constexpr (std::is_same_v<N, SpatialLeaf>) {
                os << "(bsf ";
                print_predicate(os, n.predicate);
                os << ' ';
                print_term(os, n.a);
                os << ' ';
                print_term(os, n.b);
                os << ')';
            } else if constexpr (std::is_same_v<N, MetricLeaf>) {
                os << "(msf " << lower(std::string(spatial::to_string(n.kind))) << ' ';
                print_term(os, n.a);
                os << ' ';
                print_term(os, n.b);
                os << ' ' << temporal::to_string(n.op) << ' ' << n.threshold << ')';
            } else if constexpr (std::is_same_v<N, AllenLeaf>) {
                os << "(allen " << temporal::to_string(n.relation) << ' ' << n.a << ' ' << n.b << ')';
            } else if constexpr (std::is_same_v<N, NotNode>) {
                os << "(not ";
                print_expr(os, *n.operand);
                os << ')';
            } else if constexpr (std::is_same_v<N, BinaryNode>) {
                os << '(' << temporal::to_string(n.op) << ' ';
                print_expr(os, *n.lhs);
                os << ' ';
                print_expr(os, *n.rhs);
                os << ')';
            } else {
                os << (n.quantifier == Quantifier::Any ? "(any " : "(every ") << n.variable << ' ' << n.class_label << ' ';
                print_expr(os, *n.body);
                os << ')';
            }
        },
        e.node);
}

}  // namespace detail

/// Parses a body expression on its own, e.g. "(not (xnor ... ...))".
inline temporal::ExprPtr parse_expression(std::string_view source, std::size_t line_no = 1, std::size_t column_offset = 0) {
    text::Lexer lx(source, line_no, column_offset);
    auto e = detail::parse_expr(lx);
    lx.expect_end();
    return e;
}

inline std::string to_string(const temporal::Expr& e) {
    std::ostringstream os;
    os.precision(17);
    detail::print_expr(os, e);
    return os.str();
}

inline PatternRule parse_rule(std::string_view line, std::size_t line_no = 1, std::size_t column_offset = 0) {
    text::Lexer lx(line, line_no, column_offset);
    PatternRule rule;
    rule.name = lx.ident("rule name");
    const std::size_t scol = lx.peek().column;
    const std::string scope = detail::lower(lx.ident("scope"));
    if (scope == "frame") rule.scope = Scope::PerFrame;
    else if (scope == "pair") rule.scope = Scope::ConsecutivePair;
    else if (scope == "window") rule.scope = Scope::WholeWindow;
    else lx.error_at(scol, "scope must be frame, pair or window");
    lx.expect("(");
    if (!lx.accept(")")) {
        do {
            RoleSpec r;
            r.variable = lx.ident("role variable");
            lx.expect(":");
            r.class_label = lx.ident("role class");
            for (const auto& other : rule.roles)
                if (other.variable == r.variable) lx.error("duplicate role variable '" + r.variable + "'");
            rule.roles.push_back(std::move(r));
        } while (lx.accept(","));
        lx.expect(")");
    }
    rule.unordered_roles = lx.accept_keyword("unordered");
    lx.expect("=");
    rule.body = detail::parse_expr(lx);
    lx.expect_end();
    return rule;
}

inline std::string to_string(const PatternRule& rule) {
    std::ostringstream os;
    os.precision(17);
    os << rule.name << ' ' << to_string(rule.scope) << " (";
    for (std::size_t i = 0; i < rule.roles.size(); ++i) {
        if (i) os << ", ";
        os << rule.roles[i].variable << ':' << rule.roles[i].class_label;
    }
    os << ')';
    if (rule.unordered_roles) os << " unordered";
    os << " = ";
    detail::print_expr(os, *rule.body);
    return os.str();
}

}  // namespace mmcep::rules::syntax
