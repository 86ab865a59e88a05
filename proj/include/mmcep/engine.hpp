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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mmcep/error.hpp"
#include "mmcep/frames.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/ontology.hpp"
#include "mmcep/query.hpp"
#include "mmcep/rules.hpp"
#include "mmcep/schema_io.hpp"
#include "mmcep/tracking.hpp"

namespace mmcep::engine {

using graph::FramePtr;
using graph::TimestampMs;

/// Frames captured by one completed window instance.
struct State {
    std::string publisher_id;
    std::uint64_t window_index = 0;
    std::vector<FramePtr> frames;
    FramePtr carry_in;  // the stream frame just before frames.front(), if any

    graph::TimeRange span() const { return {frames.front()->timestamp, frames.back()->timestamp}; }
};

/// Turns a frame sequence into states according to a WindowSpec. A single
/// frame completes at most one window; windows with no frames never emit.
class WindowAssigner {
public:
    explicit WindowAssigner(query::WindowSpec spec) : spec_(std::move(spec)) { query::validate(spec_); }

    std::optional<State> offer(const FramePtr& frame) {
        if (const auto* c = std::get_if<query::CountWindow>(&spec_)) return offer_count(*c, frame);
        if (const auto* t = std::get_if<query::TimeWindow>(&spec_)) return offer_time(*t, frame);
        return offer_absolute(std::get<query::AbsoluteWindow>(spec_), frame);
    }

    /// End of stream: closes a pending time or absolute window. Partial count
    /// windows stay unemitted.
    std::optional<State> flush() {
        if (std::holds_alternative<query::CountWindow>(spec_) || buffer_.empty() || done_) return std::nullopt;
        if (std::holds_alternative<query::AbsoluteWindow>(spec_)) done_ = true;
        return close_all();
    }

    std::size_t pending() const noexcept { return buffer_.size(); }
    const query::WindowSpec& spec() const noexcept { return spec_; }

private:
    State make() {
        State s;
        s.window_index = index_++;
        s.frames.assign(buffer_.begin(), buffer_.end());
        s.carry_in = previous_;
        return s;
    }

    State close_all() {
        State s = make();
        previous_ = buffer_.back();
        buffer_.clear();
        return s;
    }

    std::optional<State> offer_count(const query::CountWindow& c, const FramePtr& frame) {
        if (skip_ > 0) {
            --skip_;
            previous_ = frame;
            return std::nullopt;
        }
        buffer_.push_back(frame);
        if (static_cast<std::int64_t>(buffer_.size()) < c.size) return std::nullopt;
        if (c.slide >= c.size) {
            skip_ = c.slide - c.size;
            return close_all();
        }
        State s = make();
        for (std::int64_t i = 0; i < c.slide; ++i) {
            previous_ = buffer_.front();
            buffer_.pop_front();
        }
        return s;
    }

    std::optional<State> offer_time(const query::TimeWindow& t, const FramePtr& frame) {
        const TimestampMs ts = frame->timestamp;
        TimestampMs bucket = ts / t.duration_ms;
        if (ts % t.duration_ms != 0 && ts < 0) --bucket;
        std::optional<State> out;
        if (!buffer_.empty() && bucket != bucket_) out = close_all();
        bucket_ = bucket;
        buffer_.push_back(frame);
        return out;
    }

    std::optional<State> offer_absolute(const query::AbsoluteWindow& a, const FramePtr& frame) {
        if (done_) return std::nullopt;
        if (frame->timestamp < a.start_ms) {
            previous_ = frame;
            return std::nullopt;
        }
        if (frame->timestamp <= a.end_ms) {
            buffer_.push_back(frame);
            return std::nullopt;
        }
        done_ = true;
        if (buffer_.empty()) return std::nullopt;
        return close_all();
    }

    query::WindowSpec spec_;
    std::deque<FramePtr> buffer_;
    FramePtr previous_;
    std::int64_t skip_ = 0;
    TimestampMs bucket_ = 0;
    bool done_ = false;
    std::uint64_t index_ = 0;
};

// ---------------------------------------------------------------------------
// Notifications

struct FrameObjects {
    TimestampMs timestamp = 0;
    std::int64_t frame_no = 0;
    std::vector<graph::ObjectNode> nodes;
};

struct Notification {
    std::string query_id;
    std::string subscriber_id;
    std::string publisher_id;
    graph::TimeRange span;
    std::vector<FrameObjects> objects;
    std::string relation;  // relation class of `relations`
    std::vector<rules::RuleMatch> relations;
    std::optional<std::string> error;
    std::chrono::steady_clock::time_point emitted_at;
    double latency_us = 0;

    std::string match_kind() const {
        if (error) return "error";
        if (!objects.empty() && !relations.empty()) return "object+relation";
        return objects.empty() ? "relation" : "object";
    }
};

inline nlohmann::ordered_json to_json(const graph::ObjectNode& n) {
    nlohmann::ordered_json j;
    j["node_id"] = n.node_id;
    j["track_id"] = n.track_id ? nlohmann::ordered_json(*n.track_id) : nlohmann::ordered_json(nullptr);
    j["class"] = n.class_name;
    j["bbox"] = {n.geometry.x, n.geometry.y, n.geometry.w, n.geometry.h};
    j["confidence"] = n.confidence;
    j["attributes"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : n.attributes) j["attributes"][k] = v;
    return j;
}

inline nlohmann::ordered_json to_json(const rules::RuleMatch& m, const std::string& relation) {
    nlohmann::ordered_json j;
    j["relation"] = relation;
    j["rule"] = m.rule;
    j["roles"] = nlohmann::ordered_json::object();
    for (const auto& [role, track] : m.bindings) j["roles"][role] = track;
    j["span"] = {m.span.start, m.span.end};
    j["detail"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.detail) j["detail"][k] = v;
    return j;
}

/// One JSON line with keys query_id, subscriber_id, span_start_ms,
/// span_end_ms, match_kind, bindings, latency_us in that order.
inline std::string encode(const Notification& n) {
    nlohmann::ordered_json j;
    j["query_id"] = n.query_id;
    j["subscriber_id"] = n.subscriber_id;
    j["span_start_ms"] = n.span.start;
    j["span_end_ms"] = n.span.end;
    j["match_kind"] = n.match_kind();
    nlohmann::ordered_json b;
    b["publisher"] = n.publisher_id;
    if (n.error) {
        b["error"] = *n.error;
    } else {
        if (!n.objects.empty()) {
            auto& arr = b["objects"] = nlohmann::ordered_json::array();
            for (const auto& f : n.objects) {
                nlohmann::ordered_json fj;
                fj["timestamp_ms"] = f.timestamp;
                fj["frame_no"] = f.frame_no;
                fj["nodes"] = nlohmann::ordered_json::array();
                for (const auto& node : f.nodes) fj["nodes"].push_back(to_json(node));
                arr.push_back(std::move(fj));
            }
        }
        if (!n.relations.empty()) {
            auto& arr = b["relations"] = nlohmann::ordered_json::array();
            for (const auto& m : n.relations) arr.push_back(to_json(m, n.relation));
        }
    }
    j["bindings"] = std::move(b);
    j["latency_us"] = n.latency_us;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Engine

struct PublisherConfig {
    std::string id;
    std::vector<rules::ParkingSlot> slots;
    double parking_threshold = 0.5;
    rules::RegionMap regions;
};

struct EngineOptions {
    graph::Enrichment enrichment = graph::Enrichment::Hierarchy;
    spatial::Axis overtake_axis;
    int overtake_max_gap = 2;
    bool track_association = true;
    double iou_threshold = 0.3;
    std::size_t retention = 256;
    bool record_latency = true;
    std::ostream* state_backend = nullptr;  // JSON line per state when set
};

using Sink = std::function<void(const Notification&)>;
using SubscriptionId = std::uint64_t;

struct IngestResult {
    bool accepted = true;
    std::optional<ErrorCode> error;
    std::string message;

    explicit operator bool() const noexcept { return accepted; }
};

struct LaneStats {
    std::uint64_t frames_accepted = 0;
    std::uint64_t rejected_out_of_order = 0;
    std::uint64_t rejected_invalid = 0;
    std::uint64_t states = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t notifications = 0;
};

struct LatencySample {
    std::string query_id;
    std::string publisher_id;
    graph::TimeRange span;
    std::size_t frames = 0;
    double latency_us = 0;
    bool matched = false;
};

class Engine {
public:
    Engine(ontology::OntologySchema schema, rules::RuleRegistry registry, EngineOptions options = {})
        : schema_(std::move(schema)), registry_(std::move(registry)), options_(options) {}

    explicit Engine(schema_io::SchemaBundle bundle, EngineOptions options = {})
        : Engine(std::move(bundle.schema), std::move(bundle.rules), options) {}

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const ontology::OntologySchema& schema() const noexcept { return schema_; }
    const rules::RuleRegistry& registry() const noexcept { return registry_; }
    const EngineOptions& options() const noexcept { return options_; }

    void add_publisher(PublisherConfig config) {
        std::unique_lock lock(register_mutex_);
        if (lanes_.contains(config.id)) fail(ErrorCode::ValidationError, "publisher '" + config.id + "' already added");
        rules::ParkingConfig{config.slots, "Car", config.parking_threshold}.validate();
        const std::string id = config.id;
        lanes_.emplace(id, std::make_unique<Lane>(std::move(config), options_));
    }

    bool has_publisher(const std::string& id) const {
        std::shared_lock lock(register_mutex_);
        return lanes_.contains(id);
    }

    /// Validates and activates `q` on every publisher it names. Its windows
    /// start with the next frame each publisher ingests.
    std::string register_query(query::Query q) {
        query::validate(q, schema_, registry_);
        std::unique_lock lock(register_mutex_);
        if (queries_.contains(q.id)) fail(ErrorCode::DuplicateQueryId, "query id '" + q.id + "' already registered");
        for (const auto& p : q.publishers)
            if (!lanes_.contains(p)) fail(ErrorCode::ValidationError, "query '" + q.id + "': unknown publisher '" + p + "'");
        if (q.relation) {
            const auto& rel = schema_.relation(q.relation->relation);
            if (const auto* p = std::get_if<rules::PatternRule>(&registry_.find(rel.rule)); p && p->roles.size() != 2)
                fail(ErrorCode::ValidationError, "rule '" + rel.rule + "' must have two roles to back a relation");
        }
        auto shared = std::make_shared<const query::Query>(std::move(q));
        for (const auto& p : shared->publishers) {
            Lane& lane = *lanes_.at(p);
            std::lock_guard lane_lock(lane.mutex);
            lane.windows.push_back(std::make_unique<QueryWindow>(shared));
        }
        queries_.emplace(shared->id, shared);
        return shared->id;
    }

    bool deregister_query(const std::string& id) {
        std::unique_lock lock(register_mutex_);
        const auto it = queries_.find(id);
        if (it == queries_.end()) return false;
        for (const auto& p : it->second->publishers) {
            Lane& lane = *lanes_.at(p);
            std::lock_guard lane_lock(lane.mutex);
            std::erase_if(lane.windows, [&](const auto& w) { return w->query->id == id; });
        }
        queries_.erase(it);
        return true;
    }

    std::vector<query::Query> queries() const {
        std::shared_lock lock(register_mutex_);
        std::vector<query::Query> out;
        for (const auto& [_, q] : queries_) out.push_back(*q);
        return out;
    }

    SubscriptionId subscribe(std::string subscriber_id, Sink sink) {
        std::lock_guard lock(sink_mutex_);
        const SubscriptionId id = next_subscription_++;
        sinks_.emplace(id, SinkEntry{std::move(subscriber_id), std::move(sink)});
        return id;
    }

    /// After return the sink receives nothing further.
    bool unsubscribe(SubscriptionId id) {
        std::lock_guard lock(sink_mutex_);
        return sinks_.erase(id) > 0;
    }

    /// Validates, track-associates and appends one frame, then offers it to
    /// every window of the publisher and matches completed states.
    IngestResult ingest_frame(const std::string& publisher_id, const frames::FrameRecord& record) {
        std::shared_lock lock(register_mutex_);
        const auto it = lanes_.find(publisher_id);
        if (it == lanes_.end())
            return {false, ErrorCode::UnknownPublisher, "unknown publisher '" + publisher_id + "'"};
        Lane& lane = *it->second;
        std::lock_guard lane_lock(lane.mutex);
        const auto last = lane.stream.last_timestamp();
        if (last && record.timestamp_ms <= *last) {
            ++lane.stats.rejected_out_of_order;
            return {false, ErrorCode::OutOfOrderTimestamp,
                    "timestamp " + std::to_string(record.timestamp_ms) + " is not after " + std::to_string(*last)};
        }
        std::vector<graph::Detection> detections = record.detections;
        try {
            for (const auto& d : detections) graph::validate_detection(d, schema_);
        } catch (const Error& e) {
            ++lane.stats.rejected_invalid;
            return {false, ErrorCode::ValidationError, e.what()};
        }
        if (options_.track_association) lane.tracker.associate(detections);
        const FramePtr& frame = lane.stream.append(graph::build_mekg(detections, schema_, record.timestamp_ms, record.frame_no));
        ++lane.stats.frames_accepted;
        for (auto& w : lane.windows)
            if (auto state = w->assigner.offer(frame)) dispatch(lane, *w, std::move(*state));
        return {};
    }

    /// Closes pending time and absolute windows on every publisher.
    void finish() {
        std::shared_lock lock(register_mutex_);
        for (auto& [_, lane] : lanes_) {
            std::lock_guard lane_lock(lane->mutex);
            for (auto& w : lane->windows)
                if (auto state = w->assigner.flush()) dispatch(*lane, *w, std::move(*state));
        }
    }

    LaneStats stats(const std::string& publisher_id) const {
        std::shared_lock lock(register_mutex_);
        const auto it = lanes_.find(publisher_id);
        if (it == lanes_.end()) fail(ErrorCode::UnknownPublisher, "unknown publisher '" + publisher_id + "'");
        std::lock_guard lane_lock(it->second->mutex);
        return it->second->stats;
    }

    /// Matcher latency per (state, query), grouped by publisher id.
    std::vector<LatencySample> latency_samples() const {
        std::shared_lock lock(register_mutex_);
        std::vector<LatencySample> out;
        for (const auto& [_, lane] : lanes_) {
            std::lock_guard lane_lock(lane->mutex);
            out.insert(out.end(), lane->latencies.begin(), lane->latencies.end());
        }
        return out;
    }

    void clear_latency_samples() {
        std::shared_lock lock(register_mutex_);
        for (auto& [_, lane] : lanes_) {
            std::lock_guard lane_lock(lane->mutex);
            lane->latencies.clear();
        }
    }

private:
    struct MatcherMemory {
        rules::MatchSuppressor suppressor;
        std::optional<rules::OccupancyMap> occupancy;
        std::optional<std::uint64_t> last_parking_sequence;
    };

    struct QueryWindow {
        explicit QueryWindow(std::shared_ptr<const query::Query> q) : query(std::move(q)), assigner(query->window) {}

        std::shared_ptr<const query::Query> query;
        WindowAssigner assigner;
        MatcherMemory memory;
    };

    struct Lane {
        Lane(PublisherConfig c, const EngineOptions& o)
            : config(std::move(c)),
              stream(config.id, o.retention),
              tracker(o.iou_threshold, std::max(0, o.overtake_max_gap)) {}

        mutable std::mutex mutex;
        PublisherConfig config;
        graph::GraphStream stream;
        tracking::TrackAssociator tracker;
        std::vector<std::unique_ptr<QueryWindow>> windows;
        LaneStats stats;
        std::vector<LatencySample> latencies;
    };

    struct SinkEntry {
        std::string subscriber_id;
        Sink sink;
    };

    void dispatch(Lane& lane, QueryWindow& w, State state) {
        state.publisher_id = lane.config.id;
        ++lane.stats.states;
        log_state(w, state);
        ++lane.stats.evaluations;
        auto n = match(lane, w, state);
        if (!n) return;
        ++lane.stats.notifications;
        deliver(*n);
    }

    void log_state(const QueryWindow& w, const State& s) {
        if (!options_.state_backend) return;
        nlohmann::ordered_json j;
        j["publisher"] = s.publisher_id;
        j["query_id"] = w.query->id;
        j["window_index"] = s.window_index;
        j["span_start_ms"] = s.span().start;
        j["span_end_ms"] = s.span().end;
        j["frames"] = s.frames.size();
        std::size_t nodes = 0;
        for (const auto& f : s.frames) nodes += f->nodes.size();
        j["nodes"] = nodes;
        std::lock_guard lock(backend_mutex_);
        *options_.state_backend << j.dump() << '\n';
    }

    std::vector<FrameObjects> match_objects(const query::Query& q, const State& s) const {
        std::vector<FrameObjects> out;
        for (const auto& f : s.frames) {
            std::vector<const graph::ObjectNode*> hits;
            for (const auto& spec : q.objects) {
                const auto nodes = graph::nodes_by_class(*f, spec.class_label, schema_, options_.enrichment);
                const auto kept = graph::filter_by_attributes(nodes, spec.predicates, schema_);
                hits.insert(hits.end(), kept.begin(), kept.end());
            }
            if (hits.empty()) continue;
            std::sort(hits.begin(), hits.end(), [](auto* a, auto* b) { return a->node_id < b->node_id; });
            hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
            FrameObjects fo{f->timestamp, f->frame_no, {}};
            for (const auto* h : hits) fo.nodes.push_back(*h);
            out.push_back(std::move(fo));
        }
        return out;
    }

    std::vector<rules::RuleMatch> match_relation(const Lane& lane, QueryWindow& w, const State& s) const {
        const auto& spec = *w.query->relation;
        const auto& rel = schema_.relation(spec.relation);
        const auto& def = registry_.find(rel.rule);
        std::vector<FramePtr> with_carry;
        if (s.carry_in) with_carry.push_back(s.carry_in);
        with_carry.insert(with_carry.end(), s.frames.begin(), s.frames.end());

        std::vector<rules::RuleMatch> found;
        if (std::holds_alternative<rules::BuiltinOvertake>(def)) {
            rules::OvertakeConfig cfg{spec.class_a, spec.class_b, options_.overtake_axis, options_.overtake_max_gap};
            found = rules::eval_overtake(with_carry, cfg, schema_, options_.enrichment);
        } else if (std::holds_alternative<rules::BuiltinParking>(def)) {
            rules::ParkingConfig cfg{lane.config.slots, spec.class_a,
                                     spec.threshold.value_or(lane.config.parking_threshold)};
            std::vector<FramePtr> fresh;
            for (const auto& f : s.frames)
                if (!w.memory.last_parking_sequence || f->sequence > *w.memory.last_parking_sequence) fresh.push_back(f);
            if (fresh.empty()) return {};
            if (!w.memory.occupancy && s.carry_in)
                w.memory.occupancy = rules::occupancy(*s.carry_in, cfg, schema_, options_.enrichment);
            auto result = rules::eval_parking(fresh, cfg, schema_, w.memory.occupancy, options_.enrichment);
            w.memory.occupancy = std::move(result.final_occupancy);
            w.memory.last_parking_sequence = fresh.back()->sequence;
            for (const auto& ev : result.events) found.push_back(rules::to_rule_match(ev));
            return found;
        } else {
            const std::vector<std::string> classes{spec.class_a, spec.class_b};
            const auto rule = std::get<rules::PatternRule>(def).with_classes(classes);
            const bool pairwise = rule.scope == rules::Scope::ConsecutivePair;
            found = rules::eval_pattern(rule, pairwise ? std::span<const FramePtr>(with_carry) : std::span<const FramePtr>(s.frames),
                                        schema_, lane.config.regions, options_.overtake_max_gap, options_.enrichment);
        }
        // Overtakes are held back for one window length after a report;
        // other relation matches only drop exact repeats.
        std::uint64_t cooldown = 1;
        if (std::holds_alternative<rules::BuiltinOvertake>(def)) {
            const auto* c = std::get_if<query::CountWindow>(&w.query->window);
            cooldown = c ? static_cast<std::uint64_t>(c->size) : s.frames.size();
        }
        std::vector<rules::RuleMatch> out;
        for (auto& m : found)
            if (w.memory.suppressor.admit(m, m.transition_sequence, cooldown)) out.push_back(std::move(m));
        return out;
    }

    std::optional<Notification> match(Lane& lane, QueryWindow& w, const State& s) {
        const auto t0 = std::chrono::steady_clock::now();
        const query::Query& q = *w.query;
        Notification n;
        n.query_id = q.id;
        n.subscriber_id = q.subscriber;
        n.publisher_id = s.publisher_id;
        n.span = s.span();
        try {
            if (!q.objects.empty()) n.objects = match_objects(q, s);
            if (q.relation) {
                n.relation = q.relation->relation;
                n.relations = match_relation(lane, w, s);
            }
        } catch (const Error& e) {
            n.objects.clear();
            n.relations.clear();
            n.error = e.what();
        }
        const bool matched = n.error || !n.objects.empty() || !n.relations.empty();
        n.emitted_at = std::chrono::steady_clock::now();
        n.latency_us = std::chrono::duration<double, std::micro>(n.emitted_at - t0).count();
        if (options_.record_latency)
            lane.latencies.push_back({q.id, s.publisher_id, n.span, s.frames.size(), n.latency_us, matched});
        if (!matched) return std::nullopt;
        return n;
    }

    void deliver(const Notification& n) {
        std::lock_guard lock(sink_mutex_);
        for (const auto& [_, entry] : sinks_)
            if (entry.subscriber_id == n.subscriber_id) entry.sink(n);
    }

    const ontology::OntologySchema schema_;
    const rules::RuleRegistry registry_;
    const EngineOptions options_;

    mutable std::shared_mutex register_mutex_;
    std::map<std::string, std::unique_ptr<Lane>> lanes_;
    std::map<std::string, std::shared_ptr<const query::Query>> queries_;

    std::mutex sink_mutex_;
    std::map<SubscriptionId, SinkEntry> sinks_;
    SubscriptionId next_subscription_ = 1;

    std::mutex backend_mutex_;
};

}  // namespace mmcep::engine
