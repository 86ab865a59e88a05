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
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "mmcep/error.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/ontology.hpp"
#include "mmcep/spatial.hpp"
#include "mmcep/temporal.hpp"

namespace mmcep::rules {

using graph::FramePtr;
using graph::TimestampMs;
using graph::TrackId;

enum class Scope { PerFrame, ConsecutivePair, WholeWindow };

constexpr std::string_view to_string(Scope s) noexcept {
    switch (s) {
        case Scope::PerFrame: return "frame";
        case Scope::ConsecutivePair: return "pair";
        case Scope::WholeWindow: return "window";
    }
    return "?";
}

struct RoleSpec {
    std::string variable;
    std::string class_label;

    friend bool operator==(const RoleSpec&, const RoleSpec&) = default;
};

/// User-definable pattern: a boolean body over role variables, evaluated
/// for every binding of roles to distinct tracked objects.
///
/// With `unordered_roles` a binding is reported only in its smallest
/// track-id ordering among the permutations that also satisfy the role
/// classes, so a symmetric pattern is not reported twice.
struct PatternRule {
    std::string name;
    std::vector<RoleSpec> roles;
    temporal::ExprPtr body;
    Scope scope = Scope::PerFrame;
    bool unordered_roles = false;

    /// Same rule with role classes replaced, e.g. from a query's
    /// Overtake(Car, Bike).
    PatternRule with_classes(std::span<const std::string> classes) const {
        if (classes.size() != roles.size())
            fail(ErrorCode::ValidationError, "rule '" + name + "' takes " + std::to_string(roles.size()) + " roles");
        PatternRule out = *this;
        for (std::size_t i = 0; i < classes.size(); ++i) out.roles[i].class_label = classes[i];
        return out;
    }
};

struct OvertakeConfig {
    std::string class_a = "Vehicle";
    std::string class_b = "Vehicle";
    spatial::Axis axis;
    /// Detector dropouts of up to this many frames between two sightings of
    /// a pair still count as consecutive.
    int max_gap = 2;
};

struct ParkingSlot {
    std::string id;
    spatial::Rect rect;

    friend bool operator==(const ParkingSlot&, const ParkingSlot&) = default;
};

struct ParkingConfig {
    std::vector<ParkingSlot> slots;
    std::string object_class = "Car";
    double threshold = 0.5;

    void validate() const {
        if (!(threshold > 0.0 && threshold <= 1.0))
            fail(ErrorCode::ValidationError, "parking threshold must lie in (0, 1]");
        for (const auto& s : slots)
            if (!s.rect.has_area()) fail(ErrorCode::DegenerateGeometry, "parking slot '" + s.id + "' has no area");
    }
};

struct RuleMatch {
    std::string rule;
    std::vector<std::pair<std::string, TrackId>> bindings;  // role variable -> track, in role order
    graph::TimeRange span;
    std::map<std::string, std::string> detail;
    std::uint64_t transition_sequence = 0;  // stream position of the last evidence frame

    friend bool operator==(const RuleMatch&, const RuleMatch&) = default;
};

namespace detail {

struct Sighting {
    std::size_t frame;
    const graph::ObjectNode* node;
};

/// Per-track sightings, in frame order, of objects matching `label`.
inline std::map<TrackId, std::vector<Sighting>> sightings(std::span<const FramePtr> frames, std::string_view label,
                                                          const ontology::OntologySchema& schema,
                                                          graph::Enrichment mode) {
    std::map<TrackId, std::vector<Sighting>> out;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        for (const graph::ObjectNode* n : graph::nodes_by_class(*frames[i], label, schema, mode)) {
            if (!n->track_id)
                fail(ErrorCode::MissingTracks, "node " + std::to_string(n->node_id) + " of class " + n->class_name +
                                                   " has no track id");
            out[*n->track_id].push_back({i, n});
        }
    }
    return out;
}

}  // namespace detail

/// Overtake: for each ordered pair (o1 of class_a, o2 of class_b) and each
/// pair of consecutive frames where both appear, b = bsf(back along the
/// axis)(o1, o2) is computed at both frames; XNOR(b_i, b_i+1) == 0 is a
/// pass. b going 1 -> 0 means o1 overtook o2, 0 -> 1 means o2 overtook o1.
inline std::vector<RuleMatch> eval_overtake(std::span<const FramePtr> frames, const OvertakeConfig& config,
                                            const ontology::OntologySchema& schema,
                                            graph::Enrichment mode = graph::Enrichment::Hierarchy) {
    if (frames.empty()) fail(ErrorCode::EmptyState, "overtake evaluated on an empty state");
    const auto as = detail::sightings(frames, config.class_a, schema, mode);
    const auto bs = detail::sightings(frames, config.class_b, schema, mode);
    const spatial::AxisProjection back{true, config.axis};
    const std::size_t max_gap = static_cast<std::size_t>(std::max(0, config.max_gap));

    std::vector<RuleMatch> out;
    for (const auto& [ta, sa] : as) {
        for (const auto& [tb, sb] : bs) {
            if (ta == tb) continue;
            // Both orderings admissible: report the pair once.
            if (ta > tb && as.contains(tb) && bs.contains(ta)) continue;

            std::vector<detail::Sighting> shared_a, shared_b;
            std::size_t i = 0, j = 0;
            while (i < sa.size() && j < sb.size()) {
                if (sa[i].frame == sb[j].frame) {
                    shared_a.push_back(sa[i++]);
                    shared_b.push_back(sb[j++]);
                } else if (sa[i].frame < sb[j].frame) {
                    ++i;
                } else {
                    ++j;
                }
            }
            for (std::size_t k = 0; k + 1 < shared_a.size(); ++k) {
                if (shared_a[k + 1].frame - shared_a[k].frame - 1 > max_gap) continue;
                const int b0 = spatial::bsf(back, shared_a[k].node->geometry, shared_b[k].node->geometry);
                const int b1 = spatial::bsf(back, shared_a[k + 1].node->geometry, shared_b[k + 1].node->geometry);
                if (temporal::apply(temporal::BinaryOp::Xnor, b0 == 1, b1 == 1)) continue;
                const auto& f0 = *frames[shared_a[k].frame];
                const auto& f1 = *frames[shared_a[k + 1].frame];
                RuleMatch m;
                m.rule = std::string(ontology::kOvertakeRule);
                m.bindings = {{"o1", ta}, {"o2", tb}};
                m.span = {f0.timestamp, f1.timestamp};
                m.transition_sequence = f1.sequence;
                m.detail["b"] = std::to_string(b0) + "," + std::to_string(b1);
                m.detail["overtaker"] = b0 == 1 ? "o1" : "o2";
                m.detail["transition_frame"] = std::to_string(f1.frame_no);
                out.push_back(std::move(m));
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RuleMatch& x, const RuleMatch& y) { return x.transition_sequence < y.transition_sequence; });
    return out;
}

// ---------------------------------------------------------------------------
// Parking

enum class SlotEventKind { SlotFull, SlotVacant };

constexpr std::string_view to_string(SlotEventKind k) noexcept {
    return k == SlotEventKind::SlotFull ? "SlotFull" : "SlotVacant";
}

struct SlotOccupancy {
    bool occupied = false;
    std::optional<TrackId> track;
    double ratio = 0;

    friend bool operator==(const SlotOccupancy&, const SlotOccupancy&) = default;
};

using OccupancyMap = std::map<std::string, SlotOccupancy>;

struct SlotEvent {
    SlotEventKind kind = SlotEventKind::SlotFull;
    std::string slot_id;
    std::optional<TrackId> track;  // occupant (SlotFull) or last occupant (SlotVacant)
    TimestampMs timestamp = 0;
    std::int64_t frame_no = 0;
    std::uint64_t sequence = 0;
    double ratio = 0;

    friend bool operator==(const SlotEvent&, const SlotEvent&) = default;
};

struct ParkingResult {
    std::vector<SlotEvent> events;
    OccupancyMap final_occupancy;
};

/// Occupancy of every slot in one frame: occupied iff some object of the
/// configured class covers more than `threshold` of the slot's area. The
/// reported occupant is the one with the largest ratio (lowest track on ties).
inline OccupancyMap occupancy(const graph::MEKG& frame, const ParkingConfig& config,
                              const ontology::OntologySchema& schema,
                              graph::Enrichment mode = graph::Enrichment::Hierarchy) {
    const auto objects = graph::nodes_by_class(frame, config.object_class, schema, mode);
    OccupancyMap out;
    for (const auto& slot : config.slots) {
        SlotOccupancy best;
        for (const graph::ObjectNode* n : objects) {
            const double r = spatial::msf(spatial::MetricKind::OverlapRatio, slot.rect, n->geometry);
            const bool better = r > best.ratio || (r == best.ratio && r > 0 && n->track_id && best.track &&
                                                   *n->track_id < *best.track);
            if (better) {
                best.ratio = r;
                best.track = n->track_id;
            }
        }
        best.occupied = best.ratio > config.threshold;
        if (!best.occupied) best.track.reset();
        out.emplace(slot.id, best);
    }
    return out;
}

/// Slot transitions over `frames`. `carry_in` is the occupancy left by the
/// previous window; without it every slot starts vacant.
inline ParkingResult eval_parking(std::span<const FramePtr> frames, const ParkingConfig& config,
                                  const ontology::OntologySchema& schema, std::optional<OccupancyMap> carry_in = {},
                                  graph::Enrichment mode = graph::Enrichment::Hierarchy) {
    if (frames.empty()) fail(ErrorCode::EmptyState, "parking evaluated on an empty state");
    config.validate();
    ParkingResult result;
    OccupancyMap current = carry_in.value_or(OccupancyMap{});
    for (const auto& slot : config.slots) current.try_emplace(slot.id);
    for (const FramePtr& f : frames) {
        OccupancyMap next = occupancy(*f, config, schema, mode);
        for (const auto& slot : config.slots) {
            const SlotOccupancy& before = current[slot.id];
            const SlotOccupancy& after = next[slot.id];
            if (before.occupied == after.occupied) continue;
            SlotEvent ev;
            ev.kind = after.occupied ? SlotEventKind::SlotFull : SlotEventKind::SlotVacant;
            ev.slot_id = slot.id;
            ev.track = after.occupied ? after.track : before.track;
            ev.timestamp = f->timestamp;
            ev.frame_no = f->frame_no;
            ev.sequence = f->sequence;
            ev.ratio = after.ratio;
            result.events.push_back(std::move(ev));
        }
        current = std::move(next);
    }
    result.final_occupancy = std::move(current);
    return result;
}

inline RuleMatch to_rule_match(const SlotEvent& ev) {
    RuleMatch m;
    m.rule = std::string(ontology::kParkingRule);
    if (ev.track) m.bindings = {{"object", *ev.track}};
    m.span = {ev.timestamp, ev.timestamp};
    m.transition_sequence = ev.sequence;
    m.detail["event"] = std::string(to_string(ev.kind));
    m.detail["slot"] = ev.slot_id;
    std::ostringstream ratio;
    ratio << ev.ratio;
    m.detail["ratio"] = ratio.str();
    m.detail["transition_frame"] = std::to_string(ev.frame_no);
    return m;
}

// ---------------------------------------------------------------------------
// Generic pattern evaluation

using RegionMap = std::map<std::string, spatial::Rect, std::less<>>;

namespace detail {

/// Evaluation context over a run of frames; frame offset k in the body is
/// view[k].
class FrameContext final : public temporal::EvalContext {
public:
    FrameContext(std::vector<const graph::MEKG*> view, const ontology::OntologySchema& schema,
                 const RegionMap& regions, graph::Enrichment mode)
        : view_(std::move(view)), schema_(schema), regions_(regions), mode_(mode) {}

    std::optional<spatial::Rect> object_geometry(temporal::ObjectRef ref, int time) const override {
        if (time < 0 || static_cast<std::size_t>(time) >= view_.size()) return std::nullopt;
        if (const auto* n = view_[static_cast<std::size_t>(time)]->by_track(ref)) return n->geometry;
        return std::nullopt;
    }

    std::optional<spatial::Rect> region(std::string_view name) const override {
        const auto it = regions_.find(name);
        if (it == regions_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<temporal::ObjectRef> candidates(std::string_view label) const override {
        std::set<temporal::ObjectRef> out;
        for (const auto* f : view_) {
            for (const auto* n : graph::nodes_by_class(*f, label, schema_, mode_)) {
                if (!n->track_id) fail(ErrorCode::MissingTracks, "quantified object without a track id");
                out.insert(*n->track_id);
            }
        }
        return {out.begin(), out.end()};
    }

    std::optional<std::pair<TimestampMs, TimestampMs>> presence(temporal::ObjectRef ref) const override {
        std::optional<std::pair<TimestampMs, TimestampMs>> out;
        for (const auto* f : view_) {
            if (!f->by_track(ref)) continue;
            if (!out) out.emplace(f->timestamp, f->timestamp);
            out->second = f->timestamp;
        }
        return out;
    }

private:
    std::vector<const graph::MEKG*> view_;
    const ontology::OntologySchema& schema_;
    const RegionMap& regions_;
    graph::Enrichment mode_;
};

/// All assignments of distinct tracks to roles from per-role candidates.
inline void enumerate(const std::vector<std::vector<TrackId>>& per_role, std::vector<TrackId>& current,
                      std::vector<std::vector<TrackId>>& out) {
    const std::size_t k = current.size();
    if (k == per_role.size()) {
        out.push_back(current);
        return;
    }
    for (TrackId t : per_role[k]) {
        if (std::find(current.begin(), current.end(), t) != current.end()) continue;
        current.push_back(t);
        enumerate(per_role, current, out);
        current.pop_back();
    }
}

inline bool canonical_ordering(const std::vector<TrackId>& binding, const std::vector<std::set<TrackId>>& admissible) {
    std::vector<std::size_t> perm(binding.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    while (std::next_permutation(perm.begin(), perm.end())) {
        std::vector<TrackId> alt(binding.size());
        bool ok = true;
        for (std::size_t i = 0; i < perm.size() && ok; ++i) {
            alt[i] = binding[perm[i]];
            ok = admissible[i].contains(alt[i]);
        }
        if (ok && alt < binding) return false;
    }
    return true;
}

}  // namespace detail

/// Evaluates `rule` on `frames` for every admissible role binding.
///
/// - PerFrame: each frame where all bound tracks appear.
/// - ConsecutivePair: each pair of adjacent co-occurrence frames no more
///   than `max_gap` frames apart; offsets 0 and 1 address the two frames.
/// - WholeWindow: once per binding; offset k addresses the k-th frame.
///
/// A rule without roles is evaluated once per frame, frame pair or window.
inline std::vector<RuleMatch> eval_pattern(const PatternRule& rule, std::span<const FramePtr> frames,
                                           const ontology::OntologySchema& schema, const RegionMap& regions = {},
                                           int max_gap = 2, graph::Enrichment mode = graph::Enrichment::Hierarchy) {
    if (!rule.body) fail(ErrorCode::UnknownRule, "rule '" + rule.name + "' has no body");
    if (frames.empty()) return {};

    std::vector<std::map<TrackId, std::vector<detail::Sighting>>> role_sightings;
    std::vector<std::vector<TrackId>> per_role;
    std::vector<std::set<TrackId>> admissible;
    for (const auto& role : rule.roles) {
        role_sightings.push_back(detail::sightings(frames, role.class_label, schema, mode));
        per_role.emplace_back();
        admissible.emplace_back();
        for (const auto& [t, _] : role_sightings.back()) {
            per_role.back().push_back(t);
            admissible.back().insert(t);
        }
    }
    std::vector<std::vector<TrackId>> bindings;
    std::vector<TrackId> scratch;
    detail::enumerate(per_role, scratch, bindings);

    std::vector<RuleMatch> out;
    auto emit = [&](const std::vector<TrackId>& binding, const std::vector<const graph::MEKG*>& view) {
        temporal::Bindings b;
        for (std::size_t i = 0; i < binding.size(); ++i) b[rule.roles[i].variable] = binding[i];
        const detail::FrameContext ctx(view, schema, regions, mode);
        if (!temporal::eval_bool_expr(*rule.body, b, ctx)) return;
        RuleMatch m;
        m.rule = rule.name;
        for (std::size_t i = 0; i < binding.size(); ++i) m.bindings.emplace_back(rule.roles[i].variable, binding[i]);
        m.span = {view.front()->timestamp, view.back()->timestamp};
        m.transition_sequence = view.back()->sequence;
        out.push_back(std::move(m));
    };

    // Frames (indices) where every track of the binding is present.
    auto shared_frames = [&](const std::vector<TrackId>& binding) {
        std::vector<std::size_t> idx;
        for (std::size_t f = 0; f < frames.size(); ++f) {
            bool all = true;
            for (TrackId t : binding) all = all && frames[f]->by_track(t) != nullptr;
            if (all) idx.push_back(f);
        }
        return idx;
    };

    const std::size_t gap = static_cast<std::size_t>(std::max(0, max_gap));
    for (const auto& binding : bindings) {
        if (rule.unordered_roles && !detail::canonical_ordering(binding, admissible)) continue;
        switch (rule.scope) {
            case Scope::PerFrame:
                for (std::size_t f : shared_frames(binding)) emit(binding, {frames[f].get()});
                break;
            case Scope::ConsecutivePair: {
                const auto idx = shared_frames(binding);
                for (std::size_t k = 0; k + 1 < idx.size(); ++k)
                    if (idx[k + 1] - idx[k] - 1 <= gap) emit(binding, {frames[idx[k]].get(), frames[idx[k + 1]].get()});
                break;
            }
            case Scope::WholeWindow: {
                std::vector<const graph::MEKG*> view;
                for (const auto& f : frames) view.push_back(f.get());
                emit(binding, view);
                break;
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RuleMatch& x, const RuleMatch& y) { return x.transition_sequence < y.transition_sequence; });
    return out;
}

/// Overtake expressed as a generic pattern:
/// NOT XNOR(bsf(back)(o1, o2)@0, bsf(back)(o1, o2)@1) over frame pairs.
inline PatternRule overtake_pattern(const OvertakeConfig& config) {
    using namespace temporal;
    const spatial::AxisProjection back{true, config.axis};
    auto at = [&](int t) { return expr::spatial(back, Term{"o1", t, false}, Term{"o2", t, false}); };
    PatternRule rule;
    rule.name = std::string(ontology::kOvertakeRule);
    rule.roles = {{"o1", config.class_a}, {"o2", config.class_b}};
    rule.body = expr::lnot(expr::lxnor(at(0), at(1)));
    rule.scope = Scope::ConsecutivePair;
    rule.unordered_roles = true;
    return rule;
}

/// Drops repeats of the same relation match (same rule, bindings and
/// direction) seen again within `cooldown` stream positions of the last
/// report, so overlapping windows do not re-report one event.
class MatchSuppressor {
public:
    bool admit(const RuleMatch& m, std::uint64_t position, std::uint64_t cooldown) {
        std::string key = m.rule;
        for (const auto& [role, track] : m.bindings) key += "|" + role + "=" + std::to_string(track);
        for (const char* field : {"overtaker", "event", "slot"}) {
            if (const auto it = m.detail.find(field); it != m.detail.end()) key += "|" + it->second;
        }
        const auto it = last_.find(key);
        if (it != last_.end() && position >= it->second && position - it->second < cooldown) return false;
        last_[key] = position;
        return true;
    }

private:
    std::unordered_map<std::string, std::uint64_t> last_;
};

// ---------------------------------------------------------------------------
// Registry

struct BuiltinOvertake {};
struct BuiltinParking {};
using RuleDefinition = std::variant<BuiltinOvertake, BuiltinParking, PatternRule>;

class RuleRegistry {
public:
    RuleRegistry() {
        rules_.emplace(std::string(ontology::kOvertakeRule), BuiltinOvertake{});
        rules_.emplace(std::string(ontology::kParkingRule), BuiltinParking{});
    }

    void register_pattern(PatternRule rule, ontology::OntologySchema& schema) {
        if (rules_.contains(rule.name)) fail(ErrorCode::ValidationError, "rule '" + rule.name + "' already registered");
        if (!rule.body) fail(ErrorCode::ValidationError, "rule '" + rule.name + "' has no body");
        for (const auto& r : rule.roles)
            if (!schema.has_class(r.class_label))
                fail(ErrorCode::UnknownClass, "rule '" + rule.name + "' role class '" + r.class_label + "' unknown");
        schema.register_rule_name(rule.name);
        order_.push_back(rule.name);
        const std::string name = rule.name;
        rules_.emplace(name, std::move(rule));
    }

    const RuleDefinition& find(std::string_view name) const {
        const auto it = rules_.find(name);
        if (it == rules_.end()) fail(ErrorCode::UnknownRule, "rule '" + std::string(name) + "' is not registered");
        return it->second;
    }

    bool contains(std::string_view name) const { return rules_.contains(name); }

    /// User-defined rules in registration order.
    std::vector<const PatternRule*> patterns() const {
        std::vector<const PatternRule*> out;
        for (const auto& n : order_) out.push_back(&std::get<PatternRule>(rules_.find(n)->second));
        return out;
    }

private:
    std::map<std::string, RuleDefinition, std::less<>> rules_;
    std::vector<std::string> order_;
};

}  // namespace mmcep::rules
