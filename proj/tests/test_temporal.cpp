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

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "mmcep/temporal.hpp"
#include "oracles/allen_oracle.hpp"

using namespace mmcep;
using namespace mmcep::temporal;
using AR = AllenRelation;

namespace {

/// Hand-built world: objects are track ids with one rect per frame offset.
class FakeContext final : public EvalContext {
public:
    std::map<std::pair<ObjectRef, int>, spatial::Rect> geometry;
    std::map<std::string, spatial::Rect, std::less<>> regions;
    std::map<std::string, std::vector<ObjectRef>, std::less<>> classes;
    std::map<ObjectRef, std::pair<TimestampMs, TimestampMs>> presences;

    std::optional<spatial::Rect> object_geometry(ObjectRef ref, int time) const override {
        const auto it = geometry.find({ref, time});
        if (it == geometry.end()) return std::nullopt;
        return it->second;
    }
    std::optional<spatial::Rect> region(std::string_view name) const override {
        const auto it = regions.find(name);
        if (it == regions.end()) return std::nullopt;
        return it->second;
    }
    std::vector<ObjectRef> candidates(std::string_view label) const override {
        const auto it = classes.find(label);
        return it == classes.end() ? std::vector<ObjectRef>{} : it->second;
    }
    std::optional<std::pair<TimestampMs, TimestampMs>> presence(ObjectRef ref) const override {
        const auto it = presences.find(ref);
        if (it == presences.end()) return std::nullopt;
        return it->second;
    }
};

bool eval(const ExprPtr& e, const Bindings& b = {}, const EvalContext& ctx = FakeContext{}) {
    return eval_bool_expr(*e, b, ctx);
}

ErrorCode error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Allen, Examples) {
    EXPECT_EQ(allen({1, 3}, {3, 5}), AR::Meets);
    EXPECT_EQ(allen({1, 5}, {2, 3}), AR::Contains);
    EXPECT_EQ(allen({0, 2}, {0, 2}), AR::Equals);
}

TEST(Allen, InverseExamples) {
    EXPECT_EQ(inverse(AR::Before), AR::After);
    EXPECT_EQ(inverse(AR::Equals), AR::Equals);
    EXPECT_EQ(inverse(AR::Meets), AR::MetBy);
}

TEST(Allen, InverseIsAnInvolution) {
    for (AR r : kAllenRelations) EXPECT_EQ(inverse(inverse(r)), r);
}

TEST(Allen, ImproperIntervalRejected) {
    EXPECT_EQ(error_of([] { Interval(3, 3); }), ErrorCode::ImproperInterval);
    EXPECT_EQ(error_of([] { Interval(4, 2); }), ErrorCode::ImproperInterval);
}

TEST(Allen, NamesRoundTrip) {
    for (AR r : kAllenRelations) EXPECT_EQ(parse_allen(to_string(r)), r);
    EXPECT_FALSE(parse_allen("sometime").has_value());
}

TEST(Allen, ExactlyOneHoldsAndAgreesWithOracle) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::int64_t> d(0, 20);
    for (int i = 0; i < 5000; ++i) {
        std::int64_t a0 = d(rng), a1 = d(rng), b0 = d(rng), b1 = d(rng);
        if (a0 == a1 || b0 == b1) continue;
        if (a0 > a1) std::swap(a0, a1);
        if (b0 > b1) std::swap(b0, b1);
        const auto holds = oracle::allen_holds({a0, a1}, {b0, b1});
        ASSERT_EQ(std::count(holds.begin(), holds.end(), true), 1);
        const auto idx = static_cast<std::size_t>(std::find(holds.begin(), holds.end(), true) - holds.begin());
        const AR r = allen({a0, a1}, {b0, b1});
        EXPECT_EQ(to_string(r), oracle::kAllenNames[idx]);
        EXPECT_EQ(allen({b0, b1}, {a0, a1}), inverse(r));
    }
}

TEST(BoolExpr, XnorExamples) {
    using namespace expr;
    EXPECT_FALSE(eval(lxnor(constant(true), constant(false))));
    EXPECT_TRUE(eval(lxnor(constant(true), constant(true))));
}

TEST(BoolExpr, TruthTables) {
    using namespace expr;
    for (bool a : {false, true})
        for (bool b : {false, true}) {
            const auto A = constant(a), B = constant(b);
            EXPECT_EQ(eval(land(A, B)), a && b);
            EXPECT_EQ(eval(lor(A, B)), a || b);
            EXPECT_EQ(eval(binary(BinaryOp::Nor, A, B)), !(a || b));
            EXPECT_EQ(eval(lxor(A, B)), a != b);
            EXPECT_EQ(eval(lxnor(A, B)), a == b);
            EXPECT_EQ(eval(binary(BinaryOp::Implies, A, B)), !a || b);
            EXPECT_EQ(eval(binary(BinaryOp::Iff, A, B)), a == b);
            // De Morgan and XOR/XNOR duality.
            EXPECT_EQ(eval(lnot(land(A, B))), eval(lor(lnot(A), lnot(B))));
            EXPECT_EQ(eval(lnot(lor(A, B))), eval(land(lnot(A), lnot(B))));
            EXPECT_EQ(eval(lxnor(A, B)), eval(lnot(lxor(A, B))));
        }
}

TEST(BoolExpr, VacuousQuantifiers) {
    using namespace expr;
    EXPECT_TRUE(eval(every("x", "Car", constant(false))));
    EXPECT_FALSE(eval(any("x", "Car", constant(true))));
}

TEST(BoolExpr, QuantifiersOverCandidates) {
    using namespace expr;
    FakeContext ctx;
    ctx.classes["Car"] = {1, 2};
    ctx.regions["lot"] = {0, 0, 10, 10};
    ctx.geometry[{1, 0}] = {1, 1, 2, 2};
    ctx.geometry[{2, 0}] = {20, 20, 2, 2};
    const auto inside = expr::spatial(mmcep::spatial::TopologicalRelation::Inside, Term{"x", 0, false}, Term{"lot", 0, true});
    EXPECT_TRUE(eval(any("x", "Car", inside), {}, ctx));
    EXPECT_FALSE(eval(every("x", "Car", inside), {}, ctx));
}

TEST(BoolExpr, AbsentObjectMakesLeafFalse) {
    using namespace expr;
    FakeContext ctx;
    ctx.geometry[{1, 0}] = {0, 0, 2, 2};
    const auto leaf = expr::spatial(mmcep::spatial::TopologicalRelation::Intersect, Term{"a", 0, false}, Term{"a", 1, false});
    EXPECT_FALSE(eval(leaf, {{"a", 1}}, ctx));
    EXPECT_TRUE(eval(lnot(leaf), {{"a", 1}}, ctx));
}

TEST(BoolExpr, MetricComparison) {
    using namespace expr;
    FakeContext ctx;
    ctx.geometry[{1, 0}] = {-1, -1, 2, 2};
    ctx.geometry[{2, 0}] = {2, 3, 2, 2};
    const Bindings b{{"a", 1}, {"b", 2}};
    EXPECT_TRUE(eval(metric(spatial::MetricKind::Distance, {"a"}, {"b"}, Comparison::Equal, 5), b, ctx));
    EXPECT_FALSE(eval(metric(spatial::MetricKind::Distance, {"a"}, {"b"}, Comparison::Less, 5), b, ctx));
}

TEST(BoolExpr, AllenLeafOnPresence) {
    using namespace expr;
    FakeContext ctx;
    ctx.presences[1] = {0, 100};
    ctx.presences[2] = {100, 200};
    ctx.presences[3] = {50, 50};
    EXPECT_TRUE(eval(allen(AR::Meets, "a", "b"), {{"a", 1}, {"b", 2}}, ctx));
    EXPECT_FALSE(eval(allen(AR::Before, "a", "b"), {{"a", 1}, {"b", 2}}, ctx));
    // A single sighting has no proper interval.
    EXPECT_FALSE(eval(allen(AR::During, "c", "a"), {{"a", 1}, {"c", 3}}, ctx));
}

TEST(BoolExpr, Errors) {
    using namespace expr;
    const auto leaf = expr::spatial(mmcep::spatial::TopologicalRelation::Intersect, Term{"a"}, Term{"b"});
    EXPECT_EQ(error_of([&] { eval(leaf, {{"a", 1}}); }), ErrorCode::UnboundVariable);
    EXPECT_EQ(error_of([&] { eval(expr::spatial(mmcep::spatial::TopologicalRelation::Intersect, Term{"a"}, Term{"zone", 0, true}), {{"a", 1}}); }),
              ErrorCode::UnboundVariable);
    EXPECT_EQ(error_of([] { eval(lnot(nullptr)); }), ErrorCode::TypeMismatch);
    EXPECT_EQ(error_of([] { eval(land(constant(true), nullptr)); }), ErrorCode::TypeMismatch);
}
