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

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mmcep/error.hpp"
#include "mmcep/spatial.hpp"

namespace mmcep::temporal {

using TimestampMs = std::int64_t;

/// Proper time interval, start < end, in milliseconds.
class Interval {
public:
    Interval(TimestampMs start, TimestampMs end) : start_(start), end_(end) {
        if (!(start < end))
            fail(ErrorCode::ImproperInterval,
                 "interval [" + std::to_string(start) + ", " + std::to_string(end) + "] is not proper");
    }

    TimestampMs start() const noexcept { return start_; }
    TimestampMs end() const noexcept { return end_; }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    TimestampMs start_;
    TimestampMs end_;
};

enum class AllenRelation {
    Before,
    After,
    Overlaps,
    OverlappedBy,
    Starts,
    StartedBy,
    Meets,
    MetBy,
    Finishes,
    FinishedBy,
    During,
    Contains,
    Equals,
};

inline constexpr std::array<AllenRelation, 13> kAllenRelations{
    AllenRelation::Before,   AllenRelation::After,      AllenRelation::Overlaps, AllenRelation::OverlappedBy,
    AllenRelation::Starts,   AllenRelation::StartedBy,  AllenRelation::Meets,    AllenRelation::MetBy,
    AllenRelation::Finishes, AllenRelation::FinishedBy, AllenRelation::During,   AllenRelation::Contains,
    AllenRelation::Equals,
};

constexpr std::string_view to_string(AllenRelation r) noexcept {
    switch (r) {
        case AllenRelation::Before: return "before";
        case AllenRelation::After: return "after";
        case AllenRelation::Overlaps: return "overlaps";
        case AllenRelation::OverlappedBy: return "overlapped_by";
        case AllenRelation::Starts: return "starts";
        case AllenRelation::StartedBy: return "started_by";
        case AllenRelation::Meets: return "meets";
        case AllenRelation::MetBy: return "met_by";
        case AllenRelation::Finishes: return "finishes";
        case AllenRelation::FinishedBy: return "finished_by";
        case AllenRelation::During: return "during";
        case AllenRelation::Contains: return "contains";
        case AllenRelation::Equals: return "equals";
    }
    return "?";
}

inline std::optional<AllenRelation> parse_allen(std::string_view name) noexcept {
    for (AllenRelation r : kAllenRelations)
        if (to_string(r) == name) return r;
    return std::nullopt;
}

inline AllenRelation allen(const Interval& a, const Interval& b) noexcept {
    if (a.end() < b.start()) return AllenRelation::Before;
    if (b.end() < a.start()) return AllenRelation::After;
    if (a.end() == b.start()) return AllenRelation::Meets;
    if (b.end() == a.start()) return AllenRelation::MetBy;
    if (a.start() == b.start()) {
        if (a.end() == b.end()) return AllenRelation::Equals;
        return a.end() < b.end() ? AllenRelation::Starts : AllenRelation::StartedBy;
    }
    if (a.end() == b.end()) return a.start() > b.start() ? AllenRelation::Finishes : AllenRelation::FinishedBy;
    if (a.start() < b.start()) return a.end() < b.end() ? AllenRelation::Overlaps : AllenRelation::Contains;
    return a.end() < b.end() ? AllenRelation::During : AllenRelation::OverlappedBy;
}

constexpr AllenRelation inverse(AllenRelation r) noexcept {
    switch (r) {
        case AllenRelation::Before: return AllenRelation::After;
        case AllenRelation::After: return AllenRelation::Before;
        case AllenRelation::Overlaps: return AllenRelation::OverlappedBy;
        case AllenRelation::OverlappedBy: return AllenRelation::Overlaps;
        case AllenRelation::Starts: return AllenRelation::StartedBy;
        case AllenRelation::StartedBy: return AllenRelation::Starts;
        case AllenRelation::Meets: return AllenRelation::MetBy;
        case AllenRelation::MetBy: return AllenRelation::Meets;
        case AllenRelation::Finishes: return AllenRelation::FinishedBy;
        case AllenRelation::FinishedBy: return AllenRelation::Finishes;
        case AllenRelation::During: return AllenRelation::Contains;
        case AllenRelation::Contains: return AllenRelation::During;
        case AllenRelation::Equals: return AllenRelation::Equals;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Boolean expressions

using ObjectRef = std::int64_t;  // a track id
using Bindings = std::map<std::string, ObjectRef, std::less<>>;

/// Names either a bound object variable (looked up at frame offset `time`)
/// or, when `region` is set, a fixed named geometry of the context.
struct Term {
    std::string name;
    int time = 0;
    bool region = false;

    friend bool operator==(const Term&, const Term&) = default;
};

enum class Comparison { Less, LessEqual, Greater, GreaterEqual, Equal, NotEqual };

constexpr std::string_view to_string(Comparison c) noexcept {
    switch (c) {
        case Comparison::Less: return "<";
        case Comparison::LessEqual: return "<=";
        case Comparison::Greater: return ">";
        case Comparison::GreaterEqual: return ">=";
        case Comparison::Equal: return "=";
        case Comparison::NotEqual: return "!=";
    }
    return "?";
}

constexpr bool compare(double lhs, Comparison c, double rhs) noexcept {
    switch (c) {
        case Comparison::Less: return lhs < rhs;
        case Comparison::LessEqual: return lhs <= rhs;
        case Comparison::Greater: return lhs > rhs;
        case Comparison::GreaterEqual: return lhs >= rhs;
        case Comparison::Equal: return lhs == rhs;
        case Comparison::NotEqual: return lhs != rhs;
    }
    return false;
}

enum class BinaryOp { And, Or, Nor, Xor, Xnor, Implies, Iff };

constexpr std::string_view to_string(BinaryOp op) noexcept {
    switch (op) {
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
        case BinaryOp::Nor: return "nor";
        case BinaryOp::Xor: return "xor";
        case BinaryOp::Xnor: return "xnor";
        case BinaryOp::Implies: return "implies";
        case BinaryOp::Iff: return "iff";
    }
    return "?";
}

constexpr bool apply(BinaryOp op, bool a, bool b) noexcept {
    switch (op) {
        case BinaryOp::And: return a && b;
        case BinaryOp::Or: return a || b;
        case BinaryOp::Nor: return !(a || b);
        case BinaryOp::Xor: return a != b;
        case BinaryOp::Xnor: return a == b;
        case BinaryOp::Implies: return !a || b;
        case BinaryOp::Iff: return a == b;
    }
    return false;
}

enum class Quantifier { Any, Every };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct ConstLeaf {
    bool value = false;
};

/// bsf(pred, a, b) == 1
struct SpatialLeaf {
    spatial::SpatialPredicate predicate;
    Term a;
    Term b;
};

/// msf(kind, a, b) <op> threshold
struct MetricLeaf {
    spatial::MetricKind kind = spatial::MetricKind::Distance;
    Term a;
    Term b;
    Comparison op = Comparison::Greater;
    double threshold = 0;
};

/// allen(presence(a), presence(b)) == relation, where presence is the span
/// from an object's first to last appearance in the evaluation context.
struct AllenLeaf {
    AllenRelation relation = AllenRelation::Equals;
    std::string a;
    std::string b;
};

struct NotNode {
    ExprPtr operand;
};

struct BinaryNode {
    BinaryOp op = BinaryOp::And;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct QuantifiedNode {
    Quantifier quantifier = Quantifier::Any;
    std::string variable;
    std::string class_label;
    ExprPtr body;
};

struct Expr {
    std::variant<ConstLeaf, SpatialLeaf, MetricLeaf, AllenLeaf, NotNode, BinaryNode, QuantifiedNode> node;
};

namespace expr {

inline ExprPtr make(auto node) { return std::make_shared<const Expr>(Expr{std::move(node)}); }

inline ExprPtr constant(bool v) { return make(ConstLeaf{v}); }
inline ExprPtr spatial(spatial::SpatialPredicate p, Term a, Term b) {
    return make(SpatialLeaf{std::move(p), std::move(a), std::move(b)});
}
inline ExprPtr metric(spatial::MetricKind k, Term a, Term b, Comparison op, double threshold) {
    return make(MetricLeaf{k, std::move(a), std::move(b), op, threshold});
}
inline ExprPtr allen(AllenRelation r, std::string a, std::string b) {
    return make(AllenLeaf{r, std::move(a), std::move(b)});
}
inline ExprPtr lnot(ExprPtr e) { return make(NotNode{std::move(e)}); }
inline ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) { return make(BinaryNode{op, std::move(a), std::move(b)}); }
inline ExprPtr land(ExprPtr a, ExprPtr b) { return binary(BinaryOp::And, std::move(a), std::move(b)); }
inline ExprPtr lor(ExprPtr a, ExprPtr b) { return binary(BinaryOp::Or, std::move(a), std::move(b)); }
inline ExprPtr lxor(ExprPtr a, ExprPtr b) { return binary(BinaryOp::Xor, std::move(a), std::move(b)); }
inline ExprPtr lxnor(ExprPtr a, ExprPtr b) { return binary(BinaryOp::Xnor, std::move(a), std::move(b)); }
inline ExprPtr any(std::string var, std::string label, ExprPtr body) {
    return make(QuantifiedNode{Quantifier::Any, std::move(var), std::move(label), std::move(body)});
}
inline ExprPtr every(std::string var, std::string label, ExprPtr body) {
    return make(QuantifiedNode{Quantifier::Every, std::move(var), std::move(label), std::move(body)});
}

}  // namespace expr

/// What an expression sees of the world: object geometry per frame offset,
/// named regions, quantifier domains and presence intervals.
class EvalContext {
public:
    virtual ~EvalContext() = default;

    /// Geometry of object `ref` at frame offset `time`; nullopt when the
    /// object is not present in that frame.
    virtual std::optional<spatial::Rect> object_geometry(ObjectRef ref, int time) const = 0;
    virtual std::optional<spatial::Rect> region(std::string_view name) const = 0;
    /// Objects of `class_label` (or a subclass) in the context, ascending.
    virtual std::vector<ObjectRef> candidates(std::string_view class_label) const = 0;
    /// First and last timestamps at which `ref` appears.
    virtual std::optional<std::pair<TimestampMs, TimestampMs>> presence(ObjectRef ref) const = 0;
};

namespace detail {

inline std::optional<spatial::Rect> resolve(const Term& t, const Bindings& b, const EvalContext& ctx) {
    if (t.region) {
        auto r = ctx.region(t.name);
        if (!r) fail(ErrorCode::UnboundVariable, "unknown region '" + t.name + "'");
        return r;
    }
    const auto it = b.find(t.name);
    if (it == b.end()) fail(ErrorCode::UnboundVariable, "variable '" + t.name + "' is not bound");
    return ctx.object_geometry(it->second, t.time);
}

}  // namespace detail

/// Evaluates `e` under `bindings`. A leaf that refers to an object absent
/// from the requested frame is false.
inline bool eval_bool_expr(const Expr& e, const Bindings& bindings, const EvalContext& ctx) {
    return std::visit(
        [&](const auto& n) -> bool {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, ConstLeaf>) {
                return n.value;
            } else if constexpr (std::is_same_v<N, SpatialLeaf>) {
                const auto a = detail::resolve(n.a, bindings, ctx);
                const auto b = detail::resolve(n.b, bindings, ctx);
                if (!a || !b) return false;
                return spatial::bsf(n.predicate, *a, *b) == 1;
            } else if constexpr (std::is_same_v<N, MetricLeaf>) {
                const auto a = detail::resolve(n.a, bindings, ctx);
                const auto b = detail::resolve(n.b, bindings, ctx);
                if (!a || !b) return false;
                return compare(spatial::msf(n.kind, *a, *b), n.op, n.threshold);
            } else if constexpr (std::is_same_v<N, AllenLeaf>) {
                auto span_of = [&](const std::string& var) {
                    const auto it = bindings.find(var);
                    if (it == bindings.end()) fail(ErrorCode::UnboundVariable, "variable '" + var + "' is not bound");
                    return ctx.presence(it->second);
                };
                const auto pa = span_of(n.a);
                const auto pb = span_of(n.b);
                // Absent or single-instant presence has no proper interval.
                if (!pa || !pb || pa->first >= pa->second || pb->first >= pb->second) return false;
                return allen(Interval(pa->first, pa->second), Interval(pb->first, pb->second)) == n.relation;
            } else if constexpr (std::is_same_v<N, NotNode>) {
                if (!n.operand) fail(ErrorCode::TypeMismatch, "NOT without operand");
                return !eval_bool_expr(*n.operand, bindings, ctx);
            } else if constexpr (std::is_same_v<N, BinaryNode>) {
                if (!n.lhs || !n.rhs) fail(ErrorCode::TypeMismatch, "binary operator with missing operand");
                const bool a = eval_bool_expr(*n.lhs, bindings, ctx);
                if (n.op == BinaryOp::And && !a) return false;
                if (n.op == BinaryOp::Or && a) return true;
                if (n.op == BinaryOp::Implies && !a) return true;
                return apply(n.op, a, eval_bool_expr(*n.rhs, bindings, ctx));
            } else {
                if (!n.body) fail(ErrorCode::TypeMismatch, "quantifier without body");
                Bindings inner = bindings;
                const bool want = n.quantifier == Quantifier::Any;
                for (ObjectRef ref : ctx.candidates(n.class_label)) {
                    inner[n.variable] = ref;
                    if (eval_bool_expr(*n.body, inner, ctx) == want) return want;
                }
                return !want;  // vacuous: ANY over nothing is false, EVERY is true
            }
        },
        e.node);
}

}  // namespace mmcep::temporal
