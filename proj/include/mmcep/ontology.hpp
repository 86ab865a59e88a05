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

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mmcep/error.hpp"

namespace mmcep::ontology {

/// Closed set of admissible string values.
struct EnumDomain {
    std::set<std::string, std::less<>> values;

    friend bool operator==(const EnumDomain&, const EnumDomain&) = default;
};

/// Closed numeric range [lo, hi].
struct NumericRange {
    double lo = 0;
    double hi = 0;

    friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

using AttributeDomain = std::variant<EnumDomain, NumericRange>;
using AttributeSchema = std::map<std::string, AttributeDomain, std::less<>>;

inline std::optional<double> parse_number(std::string_view s) noexcept {
    double v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline bool admits(const AttributeDomain& domain, std::string_view value) {
    if (const auto* e = std::get_if<EnumDomain>(&domain)) return e->values.contains(value);
    const auto& range = std::get<NumericRange>(domain);
    const auto v = parse_number(value);
    return v && *v >= range.lo && *v <= range.hi;
}

struct ClassNode {
    std::string name;
    std::optional<std::string> parent;
    AttributeSchema attributes;

    friend bool operator==(const ClassNode&, const ClassNode&) = default;
};

/// Binary object-object relation (e.g. Overtake(Vehicle, Vehicle)) bound to
/// the pattern rule that decides it.
struct RelationClass {
    std::string name;
    std::pair<std::string, std::string> roles;
    std::string rule;

    static constexpr int arity = 2;

    friend bool operator==(const RelationClass&, const RelationClass&) = default;
};

/// Built-in pattern rules that every schema knows about.
inline constexpr std::string_view kOvertakeRule = "overtake";
inline constexpr std::string_view kParkingRule = "parking";

/// Class hierarchy, relation classes and the detection-capability registry.
///
/// Single inheritance. Mutated only while the engine is being configured;
/// afterwards it is shared read-only between lanes.
class OntologySchema {
public:
    OntologySchema() : rules_{std::string(kOvertakeRule), std::string(kParkingRule)} {}

    OntologySchema& register_class(std::string name, std::optional<std::string> parent = std::nullopt,
                                   AttributeSchema attributes = {}) {
        if (name.empty()) fail(ErrorCode::ValidationError, "empty class name");
        if (classes_.contains(name)) fail(ErrorCode::DuplicateClass, "class '" + name + "' already registered");
        if (relations_.contains(name))
            fail(ErrorCode::ValidationError, "class '" + name + "' collides with a relation name");
        if (parent && !classes_.contains(*parent))
            fail(ErrorCode::UnknownParent, "parent '" + *parent + "' of '" + name + "' is not registered");
        if (parent && *parent == name) fail(ErrorCode::CycleDetected, "class '" + name + "' cannot be its own parent");
        classes_.emplace(name, ClassNode{name, std::move(parent), std::move(attributes)});
        order_.push_back(std::move(name));
        return *this;
    }

    /// Moves an existing class under a new parent (or to the root).
    OntologySchema& reparent_class(std::string_view name, std::optional<std::string> parent) {
        auto& node = mutable_node(name);
        if (parent) {
            if (!classes_.contains(*parent)) fail(ErrorCode::UnknownParent, "parent '" + *parent + "' is not registered");
            if (is_subclass(*parent, name))
                fail(ErrorCode::CycleDetected, "making '" + *parent + "' the parent of '" + std::string(name) +
                                                   "' would create a cycle");
        }
        node.parent = std::move(parent);
        return *this;
    }

    OntologySchema& register_rule_name(std::string rule) {
        rules_.insert(std::move(rule));
        return *this;
    }

    OntologySchema& register_relation_class(std::string name, std::pair<std::string, std::string> roles,
                                            std::string rule) {
        require_class(roles.first);
        require_class(roles.second);
        if (!rules_.contains(rule)) fail(ErrorCode::UnknownRule, "rule '" + rule + "' is not registered");
        if (relations_.contains(name)) fail(ErrorCode::DuplicateRelation, "relation '" + name + "' already registered");
        if (classes_.contains(name))
            fail(ErrorCode::ValidationError, "relation '" + name + "' collides with a class name");
        relations_.emplace(name, RelationClass{name, std::move(roles), std::move(rule)});
        relation_order_.push_back(std::move(name));
        return *this;
    }

    OntologySchema& add_detectable(std::string_view name) {
        require_class(name);
        detectable_.insert(std::string(name));
        return *this;
    }

    OntologySchema& add_extractable_attribute(std::string_view cls, std::string_view attribute) {
        if (!attribute_domain(cls, attribute))
            fail(ErrorCode::UnknownAttribute,
                 "'" + std::string(attribute) + "' is not an attribute of '" + std::string(cls) + "'");
        extractable_.emplace(std::string(cls), std::string(attribute));
        return *this;
    }

    bool has_class(std::string_view name) const { return classes_.contains(name); }
    bool has_rule(std::string_view name) const { return rules_.contains(name); }

    const ClassNode& class_node(std::string_view name) const {
        const auto it = classes_.find(name);
        if (it == classes_.end()) fail(ErrorCode::UnknownClass, "class '" + std::string(name) + "' is not registered");
        return it->second;
    }

    const RelationClass& relation(std::string_view name) const {
        const auto it = relations_.find(name);
        if (it == relations_.end())
            fail(ErrorCode::UnknownRelation, "relation '" + std::string(name) + "' is not registered");
        return it->second;
    }

    bool has_relation(std::string_view name) const { return relations_.contains(name); }

    /// True iff a == b or b is a transitive ancestor of a.
    bool is_subclass(std::string_view a, std::string_view b) const {
        require_class(b);
        const ClassNode* node = &class_node(a);
        while (true) {
            if (node->name == b) return true;
            if (!node->parent) return false;
            node = &class_node(*node->parent);
        }
    }

    /// Detectable classes that satisfy `label`, i.e. the label itself or any
    /// of its detectable descendants.
    std::set<std::string, std::less<>> expand_label(std::string_view label) const {
        require_class(label);
        std::set<std::string, std::less<>> out;
        for (const auto& c : detectable_)
            if (is_subclass(c, label)) out.insert(c);
        return out;
    }

    /// Domain of `attribute` as seen by `cls`, searching up the hierarchy.
    const AttributeDomain* attribute_domain(std::string_view cls, std::string_view attribute) const {
        const ClassNode* node = &class_node(cls);
        while (true) {
            if (const auto it = node->attributes.find(attribute); it != node->attributes.end()) return &it->second;
            if (!node->parent) return nullptr;
            node = &class_node(*node->parent);
        }
    }

    /// True if any class in the subtree rooted at `label` declares or inherits
    /// `attribute`.
    bool subtree_has_attribute(std::string_view label, std::string_view attribute) const {
        for (const auto& name : order_)
            if (is_subclass(name, label) && attribute_domain(name, attribute)) return true;
        return false;
    }

    bool declares_attribute_anywhere(std::string_view attribute) const {
        for (const auto& [name, node] : classes_)
            if (node.attributes.contains(attribute)) return true;
        return false;
    }

    /// Class names in registration order.
    const std::vector<std::string>& class_order() const noexcept { return order_; }
    const std::vector<std::string>& relation_order() const noexcept { return relation_order_; }
    const std::set<std::string, std::less<>>& detectable() const noexcept { return detectable_; }
    const std::set<std::pair<std::string, std::string>>& extractable() const noexcept { return extractable_; }
    const std::set<std::string, std::less<>>& rules() const noexcept { return rules_; }

    friend bool operator==(const OntologySchema& a, const OntologySchema& b) {
        return a.classes_ == b.classes_ && a.relations_ == b.relations_ && a.detectable_ == b.detectable_ &&
               a.extractable_ == b.extractable_;
    }

private:
    void require_class(std::string_view name) const { (void)class_node(name); }

    ClassNode& mutable_node(std::string_view name) {
        const auto it = classes_.find(name);
        if (it == classes_.end()) fail(ErrorCode::UnknownClass, "class '" + std::string(name) + "' is not registered");
        return it->second;
    }

    std::map<std::string, ClassNode, std::less<>> classes_;
    std::vector<std::string> order_;
    std::map<std::string, RelationClass, std::less<>> relations_;
    std::vector<std::string> relation_order_;
    std::set<std::string, std::less<>> detectable_;
    std::set<std::pair<std::string, std::string>> extractable_;
    std::set<std::string, std::less<>> rules_;
};

}  // namespace mmcep::ontology
