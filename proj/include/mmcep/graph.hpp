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

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmcep/error.hpp"
#include "mmcep/ontology.hpp"
#include "mmcep/spatial.hpp"

namespace mmcep::graph {

using TimestampMs = std::int64_t;
using TrackId = std::int64_t;
using NodeId = std::uint32_t;
using Attributes = std::map<std::string, std::string, std::less<>>;

/// One detector output for a frame, before it becomes a graph node.
struct Detection {
    std::string class_name;
    spatial::Rect bbox;
    Attributes attributes;
    double confidence = 1.0;
    std::optional<TrackId> track_id;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct ObjectNode {
    NodeId node_id = 0;  // frame-local
    std::string class_name;
    Attributes attributes;
    spatial::Rect geometry;
    double confidence = 1.0;
    std::optional<TrackId> track_id;  // cross-frame identity

    friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

struct RelationEdge {
    NodeId subject = 0;
    NodeId object = 0;
    std::string label;

    friend bool operator==(const RelationEdge&, const RelationEdge&) = default;
};

/// Closed time range [start, end] covered by a run of frames; a single frame
/// gives start == end.
struct TimeRange {
    TimestampMs start = 0;
    TimestampMs end = 0;

    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

/// Per-frame labelled multigraph: object nodes plus labelled relation edges.
struct MEKG {
    TimestampMs timestamp = 0;
    std::int64_t frame_no = 0;   // metadata only, never used for ordering
    std::uint64_t sequence = 0;  // position in the publisher stream, set on append
    std::vector<ObjectNode> nodes;
    std::vector<RelationEdge> edges;

    const ObjectNode* node(NodeId id) const noexcept {
        for (const auto& n : nodes)
            if (n.node_id == id) return &n;
        return nullptr;
    }

    const ObjectNode* by_track(TrackId track) const noexcept {
        for (const auto& n : nodes)
            if (n.track_id == track) return &n;
        return nullptr;
    }

    /// Adds a labelled edge. Parallel edges with different labels are allowed;
    /// an exact duplicate is ignored.
    void add_edge(RelationEdge edge, const ontology::OntologySchema& schema) {
        if (edge.subject == edge.object) fail(ErrorCode::InvalidEdge, "self-relation on node " + std::to_string(edge.subject));
        if (!node(edge.subject) || !node(edge.object)) fail(ErrorCode::InvalidEdge, "edge endpoint not in this graph");
        if (edge.label.empty() || schema.has_class(edge.label))
            fail(ErrorCode::InvalidEdge, "edge label '" + edge.label + "' must not be an object class");
        for (const auto& e : edges)
            if (e == edge) return;
        edges.push_back(std::move(edge));
    }

    friend bool operator==(const MEKG&, const MEKG&) = default;
};

using FramePtr = std::shared_ptr<const MEKG>;

/// Checks class membership, attribute names and values, and geometry.
inline void validate_detection(const Detection& d, const ontology::OntologySchema& schema) {
    if (!schema.has_class(d.class_name)) fail(ErrorCode::UnknownClass, "class '" + d.class_name + "' is not registered");
    if (!d.bbox.valid()) fail(ErrorCode::BadGeometry, "bounding box has negative or non-finite extent");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
        fail(ErrorCode::InvalidConfidence, "confidence " + std::to_string(d.confidence) + " outside [0,1]");
    for (const auto& [name, value] : d.attributes) {
        const auto* domain = schema.attribute_domain(d.class_name, name);
        if (!domain) fail(ErrorCode::UnknownAttribute, "'" + name + "' is not an attribute of '" + d.class_name + "'");
        if (!ontology::admits(*domain, value))
            fail(ErrorCode::AttributeDomainViolation, "value '" + value + "' not in the domain of " + d.class_name + "." + name);
    }
}

/// One node per detection, node ids 0..n-1 in input order. Edges are left
/// empty; spatial relations are evaluated on demand by the matcher.
inline MEKG build_mekg(std::span<const Detection> detections, const ontology::OntologySchema& schema,
                       TimestampMs timestamp, std::int64_t frame_no = 0) {
    MEKG g;
    g.timestamp = timestamp;
    g.frame_no = frame_no;
    g.nodes.reserve(detections.size());
    NodeId next = 0;
    for (const auto& d : detections) {
        validate_detection(d, schema);
        g.nodes.push_back(ObjectNode{next++, d.class_name, d.attributes, d.bbox, d.confidence, d.track_id});
    }
    return g;
}

/// Strictly time-ordered sequence of graphs from one publisher.
///
/// With a retention limit only the newest `retention` frames are kept; the
/// ordering check always applies to the last accepted timestamp.
class GraphStream {
public:
    explicit GraphStream(std::string publisher_id, std::size_t retention = 0)
        : publisher_id_(std::move(publisher_id)), retention_(retention) {}

    const FramePtr& append(MEKG frame) {
        if (last_ && frame.timestamp <= *last_)
            fail(ErrorCode::OutOfOrderTimestamp, "timestamp " + std::to_string(frame.timestamp) +
                                                     " is not after " + std::to_string(*last_) + " on stream '" +
                                                     publisher_id_ + "'");
        frame.sequence = next_sequence_++;
        last_ = frame.timestamp;
        frames_.push_back(std::make_shared<const MEKG>(std::move(frame)));
        if (retention_ && frames_.size() > retention_) frames_.pop_front();
        return frames_.back();
    }

    const std::string& publisher_id() const noexcept { return publisher_id_; }
    std::size_t size() const noexcept { return frames_.size(); }
    bool empty() const noexcept { return frames_.empty(); }
    std::uint64_t total_appended() const noexcept { return next_sequence_; }
    std::optional<TimestampMs> last_timestamp() const noexcept { return last_; }
    const std::deque<FramePtr>& frames() const noexcept { return frames_; }

private:
    std::string publisher_id_;
    std::size_t retention_;
    std::deque<FramePtr> frames_;
    std::optional<TimestampMs> last_;
    std::uint64_t next_sequence_ = 0;
};

enum class Enrichment { Hierarchy, ExactClass };

/// Nodes whose class satisfies `label`. With hierarchy enrichment a node
/// matches when its class is `label` or a subclass of it; otherwise only an
/// exact class-name match counts.
inline std::vector<const ObjectNode*> nodes_by_class(const MEKG& g, std::string_view label,
                                                     const ontology::OntologySchema& schema,
                                                     Enrichment mode = Enrichment::Hierarchy) {
    if (!schema.has_class(label)) fail(ErrorCode::UnknownClass, "class '" + std::string(label) + "' is not registered");
    std::vector<const ObjectNode*> out;
    for (const auto& n : g.nodes) {
        const bool hit = mode == Enrichment::Hierarchy ? schema.is_subclass(n.class_name, label) : n.class_name == label;
        if (hit) out.push_back(&n);
    }
    return out;
}

struct AttributePredicate {
    std::string attribute;
    std::string value;

    friend bool operator==(const AttributePredicate&, const AttributePredicate&) = default;
};

/// Keeps nodes satisfying every predicate. An attribute no class in the
/// schema declares is an error; a node whose own class lineage lacks the
/// attribute simply does not match. Numeric domains compare numerically.
inline std::vector<const ObjectNode*> filter_by_attributes(std::span<const ObjectNode* const> nodes,
                                                           std::span<const AttributePredicate> predicates,
                                                           const ontology::OntologySchema& schema) {
    for (const auto& p : predicates)
        if (!schema.declares_attribute_anywhere(p.attribute))
            fail(ErrorCode::UnknownAttribute, "attribute '" + p.attribute + "' is not declared by any class");
    std::vector<const ObjectNode*> out;
    for (const ObjectNode* n : nodes) {
        bool ok = true;
        for (const auto& p : predicates) {
            const auto* domain = schema.attribute_domain(n->class_name, p.attribute);
            const auto it = n->attributes.find(p.attribute);
            if (!domain || it == n->attributes.end()) {
                ok = false;
                break;
            }
            if (std::holds_alternative<ontology::NumericRange>(*domain)) {
                const auto lhs = ontology::parse_number(it->second);
                const auto rhs = ontology::parse_number(p.value);
                ok = lhs && rhs && *lhs == *rhs;
            } else {
                ok = it->second == p.value;
            }
            if (!ok) break;
        }
        if (ok) out.push_back(n);
    }
    return out;
}

}  // namespace mmcep::graph
