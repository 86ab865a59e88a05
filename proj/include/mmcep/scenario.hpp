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

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmcep/error.hpp"
#include "mmcep/frames.hpp"
#include "mmcep/rules.hpp"
#include "mmcep/text.hpp"

/// Deterministic synthetic scenarios with analytic ground truth.
///
/// Objects move with constant integer velocity along x in separate lanes.
/// Positions are integral centroids, so every crossing and threshold frame is
/// exact. Ground truth is derived from the trajectories, never from the
/// (possibly noisy) emitted detections.
namespace mmcep::scenario {

enum class Kind { Overtake, FollowNoOvertake, ParkingEnterExit, MultiObjectNoise };

constexpr std::string_view to_string(Kind k) noexcept {
    switch (k) {
        case Kind::Overtake: return "overtake";
        case Kind::FollowNoOvertake: return "follow_no_overtake";
        case Kind::ParkingEnterExit: return "parking_enter_exit";
        case Kind::MultiObjectNoise: return "multi_object_noise";
    }
    return "?";
}

inline std::optional<Kind> parse_kind(std::string_view s) noexcept {
    for (Kind k : {Kind::Overtake, Kind::FollowNoOvertake, Kind::ParkingEnterExit, Kind::MultiObjectNoise})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// `frames == 0` picks a kind-specific default. Recognised params:
///   all kinds:        drop (detection drop probability), tracks (1 = emit track ids)
///   overtake/follow:  a_x0, a_speed, b_x0, b_speed, lane_offset
///   parking:          slot_x, slot_y, slot_w, slot_h, speed, dwell, threshold
///   noise:            objects
struct ScenarioSpec {
    Kind kind = Kind::Overtake;
    std::uint64_t seed = 0;
    int frames = 0;
    int fps = 30;
    std::string stream_id = "P1";
    std::map<std::string, double, std::less<>> params;
};

struct GroundTruthEvent {
    std::string type;  // "overtake", "SlotFull", "SlotVacant"
    std::vector<graph::TrackId> tracks;
    std::int64_t first_frame = 0;
    std::int64_t last_frame = 0;
    std::map<std::string, std::string> detail;

    friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) = default;
};

struct GroundTruthObject {
    graph::TrackId track_id = 0;
    std::string class_name;
    spatial::Rect bbox;

    friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

struct GroundTruthFrame {
    std::int64_t frame_no = 0;
    graph::TimestampMs timestamp_ms = 0;
    std::vector<GroundTruthObject> objects;

    friend bool operator==(const GroundTruthFrame&, const GroundTruthFrame&) = default;
};

struct GroundTruth {
    std::vector<GroundTruthEvent> events;
    std::vector<GroundTruthFrame> frames;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Scenario {
    std::vector<frames::FrameRecord> frames;
    GroundTruth truth;
    std::vector<rules::ParkingSlot> slots;
    double parking_threshold = 0.5;
};

namespace detail {

/// Draws from mt19937_64 without the implementation-defined std
/// distributions, so output is identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<std::int64_t>(engine_() % span);
    }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

struct Mover {
    graph::TrackId track;
    std::string class_name;
    std::int64_t x0;  // centroid x at frame 0
    std::int64_t speed;
    std::int64_t cy;  // centroid y
    std::int64_t w;
    std::int64_t h;
    graph::Attributes attributes;

    std::int64_t cx(std::int64_t frame) const { return x0 + speed * frame; }
    spatial::Rect box(std::int64_t frame) const {
        return {static_cast<double>(cx(frame)) - static_cast<double>(w) / 2.0,
                static_cast<double>(cy) - static_cast<double>(h) / 2.0, static_cast<double>(w), static_cast<double>(h)};
    }
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

inline const std::vector<std::string>& colors() {
    static const std::vector<std::string> c{"black", "blue", "red", "silver", "white"};
    return c;
}

inline graph::TimestampMs timestamp(std::int64_t frame, int fps) {
    return (frame * 1000 + fps / 2) / fps;
}

}  // namespace detail

namespace detail {

inline double param(const ScenarioSpec& s, std::string_view key, double fallback) {
    const auto it = s.params.find(key);
    return it == s.params.end() ? fallback : it->second;
}

inline std::int64_t iparam(const ScenarioSpec& s, std::string_view key, std::int64_t fallback) {
    const double v = param(s, key, static_cast<double>(fallback));
    if (v != std::floor(v)) fail(ErrorCode::InvalidSpec, "parameter '" + std::string(key) + "' must be an integer");
    return static_cast<std::int64_t>(v);
}

/// Emits frames for the movers (dropping detections with probability `drop`)
/// and the matching presence table.
inline void render(Scenario& out, const ScenarioSpec& spec, const std::vector<Mover>& movers, Rng& rng) {
    const double drop = param(spec, "drop", 0.0);
    const bool tracks = param(spec, "tracks", 0.0) != 0.0;
    if (!(drop >= 0.0 && drop <= 1.0)) fail(ErrorCode::InvalidSpec, "drop probability outside [0, 1]");
    for (std::int64_t f = 0; f < spec.frames; ++f) {
        frames::FrameRecord rec;
        rec.stream_id = spec.stream_id;
        rec.frame_no = f;
        rec.timestamp_ms = timestamp(f, spec.fps);
        GroundTruthFrame gt{f, rec.timestamp_ms, {}};
        for (const auto& m : movers) {
            gt.objects.push_back({m.track, m.class_name, m.box(f)});
            // Draw for every object so the noise pattern does not depend on drop.
            const bool dropped = rng.unit() < drop;
            if (dropped) continue;
            graph::Detection d;
            d.class_name = m.class_name;
            d.bbox = m.box(f);
            d.attributes = m.attributes;
            d.confidence = 1.0;
            if (tracks) d.track_id = m.track;
            rec.detections.push_back(std::move(d));
        }
        out.frames.push_back(std::move(rec));
        out.truth.frames.push_back(std::move(gt));
    }
}

/// First frame at which back(a, b) = (cx_a - cx_b < 0) changes value, for
/// every change inside [0, frames).
inline void overtake_events(GroundTruth& truth, const Mover& a, const Mover& b, std::int64_t frames) {
    for (std::int64_t f = 1; f < frames; ++f) {
        const bool before = a.cx(f - 1) - b.cx(f - 1) < 0;
        const bool after = a.cx(f) - b.cx(f) < 0;
        if (before == after) continue;
        truth.events.push_back({"overtake", {a.track, b.track}, f - 1, f, {{"overtaker", before ? "o1" : "o2"}}});
    }
}

inline void pair_scenario(Scenario& out, const ScenarioSpec& spec, Rng& rng, bool overtake) {
    const std::int64_t frames = spec.frames;
    if (frames < 3) fail(ErrorCode::InvalidSpec, "need at least 3 frames");
    const std::int64_t gap_default = rng.between(10, 60);
    const std::int64_t b_speed_default = rng.between(1, 3);
    std::int64_t dv_default;
    if (overtake) {
        const std::int64_t dv_min = std::max<std::int64_t>(1, ceil_div(gap_default, frames - 2));
        dv_default = rng.between(dv_min, std::max<std::int64_t>(dv_min, 4));
    } else {
        dv_default = -rng.between(0, 2);
    }
    const std::int64_t lane_default = rng.between(0, 40);
    const std::int64_t a_x0 = iparam(spec, "a_x0", 60);
    const std::int64_t b_x0 = iparam(spec, "b_x0", a_x0 + gap_default);
    const std::int64_t b_speed = iparam(spec, "b_speed", b_speed_default);
    const std::int64_t a_speed = iparam(spec, "a_speed", b_speed + dv_default);
    const std::int64_t lane = iparam(spec, "lane_offset", lane_default);

    const auto& pal = colors();
    Mover a{1, "Car", a_x0, a_speed, 200, 60, 30, {{"color", pal[static_cast<std::size_t>(rng.between(0, 4))]}}};
    Mover b{2, "Bike", b_x0, b_speed, 200 + lane, 30, 20, {{"color", pal[static_cast<std::size_t>(rng.between(0, 4))]}}};

    const std::int64_t gap = b_x0 - a_x0;
    const std::int64_t dv = a_speed - b_speed;
    if (gap <= 0) fail(ErrorCode::InvalidSpec, "the first object must start behind the second");
    if (overtake) {
        if (dv <= 0) fail(ErrorCode::InvalidSpec, "overtaking object must be faster");
        const std::int64_t k = ceil_div(gap, dv);
        if (k >= frames) fail(ErrorCode::InvalidSpec, "speeds never cross within the frame budget");
    } else if (dv > 0 && ceil_div(gap, dv) < frames) {
        fail(ErrorCode::InvalidSpec, "follow scenario would cross within the frame budget");
    }
    overtake_events(out.truth, a, b, frames);
    render(out, spec, {a, b}, rng);
}

inline void parking_scenario(Scenario& out, ScenarioSpec& spec, Rng& rng) {
    const std::int64_t sx = iparam(spec, "slot_x", 300);
    const std::int64_t sy = iparam(spec, "slot_y", 100);
    const std::int64_t sw = iparam(spec, "slot_w", 60);
    const std::int64_t sh = iparam(spec, "slot_h", 120);
    const std::int64_t speed = iparam(spec, "speed", rng.between(2, 5));
    const std::int64_t dwell = iparam(spec, "dwell", rng.between(3, 10));
    const double r = param(spec, "threshold", 0.5);
    if (sw <= 0 || sh <= 0 || sw % 2 || sh % 2) fail(ErrorCode::InvalidSpec, "slot extent must be positive and even");
    if (speed <= 0 || dwell < 0) fail(ErrorCode::InvalidSpec, "speed must be positive and dwell non-negative");
    if (!(r > 0.0 && r <= 1.0)) fail(ErrorCode::InvalidSpec, "threshold outside (0, 1]");

    const std::int64_t slot_cx = sx + sw / 2;
    const std::int64_t arrive = ceil_div(sw + 10, speed);  // starts clear of the slot
    if (spec.frames == 0) spec.frames = static_cast<int>(2 * arrive + dwell + 5);
    if (spec.frames < 2) fail(ErrorCode::InvalidSpec, "need at least 2 frames");

    // Piecewise trajectory: approach, dwell centred on the slot, leave.
    auto cx = [&](std::int64_t f) {
        if (f <= arrive) return slot_cx - speed * (arrive - f);
        if (f <= arrive + dwell) return slot_cx;
        return slot_cx + speed * (f - arrive - dwell);
    };
    auto occupied = [&](std::int64_t f) {
        const std::int64_t overlap = std::max<std::int64_t>(0, sw - std::abs(cx(f) - slot_cx));
        return static_cast<double>(overlap) / static_cast<double>(sw) > r;
    };

    const graph::Attributes attrs{{"color", colors()[static_cast<std::size_t>(rng.between(0, 4))]}};
    const double drop = param(spec, "drop", 0.0);
    const bool tracks = param(spec, "tracks", 0.0) != 0.0;
    bool was = false;
    for (std::int64_t f = 0; f < spec.frames; ++f) {
        const spatial::Rect box{static_cast<double>(cx(f) - sw / 2), static_cast<double>(sy), static_cast<double>(sw),
                                static_cast<double>(sh)};
        frames::FrameRecord rec;
        rec.stream_id = spec.stream_id;
        rec.frame_no = f;
        rec.timestamp_ms = timestamp(f, spec.fps);
        if (!(rng.unit() < drop)) {
            graph::Detection d{"Car", box, attrs, 1.0, std::nullopt};
            if (tracks) d.track_id = 1;
            rec.detections.push_back(std::move(d));
        }
        out.truth.frames.push_back({f, rec.timestamp_ms, {{1, "Car", box}}});
        out.frames.push_back(std::move(rec));

        const bool now = occupied(f);
        if (now != was)
            out.truth.events.push_back({now ? "SlotFull" : "SlotVacant", {1}, f, f, {{"slot", "s1"}}});
        was = now;
    }
    out.slots.push_back({"s1", {static_cast<double>(sx), static_cast<double>(sy), static_cast<double>(sw),
                                static_cast<double>(sh)}});
    out.parking_threshold = r;
}

inline void noise_scenario(Scenario& out, const ScenarioSpec& spec, Rng& rng) {
    const std::int64_t n = iparam(spec, "objects", 10);
    if (n < 1) fail(ErrorCode::InvalidSpec, "need at least one object");
    static const std::vector<std::pair<std::string, std::pair<int, int>>> classes{
        {"Car", {60, 30}}, {"Bike", {30, 20}}, {"Person", {20, 50}}, {"Truck", {90, 40}}};
    std::vector<Mover> movers;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& [cls, size] = classes[static_cast<std::size_t>(rng.between(0, 3))];
        Mover m{i + 1, cls, rng.between(0, 400), rng.between(-3, 3), 40 + 60 * i, size.first, size.second, {}};
        if (cls == "Car" || cls == "Bike") m.attributes["color"] = colors()[static_cast<std::size_t>(rng.between(0, 4))];
        movers.push_back(std::move(m));
    }
    for (std::size_t i = 0; i < movers.size(); ++i)
        for (std::size_t j = i + 1; j < movers.size(); ++j)
            if (movers[i].class_name != "Person" && movers[j].class_name != "Person")
                overtake_events(out.truth, movers[i], movers[j], spec.frames);
    render(out, spec, movers, rng);
}

}  // namespace detail

inline Scenario generate_scenario(ScenarioSpec spec) {
    if (spec.fps <= 0 || spec.fps > 1000) fail(ErrorCode::InvalidSpec, "fps must lie in [1, 1000]");
    if (spec.frames < 0) fail(ErrorCode::InvalidSpec, "negative frame count");
    detail::Rng rng(spec.seed);
    Scenario out;
    switch (spec.kind) {
        case Kind::Overtake:
        case Kind::FollowNoOvertake:
            if (spec.frames == 0) spec.frames = 40;
            detail::pair_scenario(out, spec, rng, spec.kind == Kind::Overtake);
            break;
        case Kind::ParkingEnterExit: detail::parking_scenario(out, spec, rng); break;
        case Kind::MultiObjectNoise:
            if (spec.frames == 0) spec.frames = 125;
            if (!spec.params.contains("drop")) spec.params["drop"] = 0.2;
            detail::noise_scenario(out, spec, rng);
            break;
    }
    return out;
}

/// Parses "synthetic:<kind>[ key=value ...]" source descriptors, e.g.
/// "synthetic:overtake seed=7 frames=40 drop=0.1".
inline ScenarioSpec parse_descriptor(std::string_view descriptor, std::string stream_id) {
    constexpr std::string_view prefix = "synthetic:";
    if (descriptor.substr(0, prefix.size()) != prefix)
        fail(ErrorCode::InvalidSpec, "scenario descriptor must start with 'synthetic:'");
    descriptor.remove_prefix(prefix.size());
    ScenarioSpec spec;
    spec.stream_id = std::move(stream_id);
    std::vector<std::string_view> words;
    std::size_t start = 0;
    while (start < descriptor.size()) {
        const auto sp = descriptor.find(' ', start);
        const auto w = descriptor.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start);
        if (!w.empty()) words.push_back(w);
        if (sp == std::string_view::npos) break;
        start = sp + 1;
    }
    if (words.empty()) fail(ErrorCode::InvalidSpec, "missing scenario kind");
    const auto kind = parse_kind(words[0]);
    if (!kind) fail(ErrorCode::InvalidSpec, "unknown scenario kind '" + std::string(words[0]) + "'");
    spec.kind = *kind;
    for (std::size_t i = 1; i < words.size(); ++i) {
        const auto eq = words[i].find('=');
        if (eq == std::string_view::npos) fail(ErrorCode::InvalidSpec, "expected key=value, got '" + std::string(words[i]) + "'");
        const std::string key(words[i].substr(0, eq));
        const auto value = ontology::parse_number(words[i].substr(eq + 1));
        if (!value) fail(ErrorCode::InvalidSpec, "parameter '" + key + "' is not a number");
        if (key == "seed") spec.seed = static_cast<std::uint64_t>(*value);
        else if (key == "frames") spec.frames = static_cast<int>(*value);
        else if (key == "fps") spec.fps = static_cast<int>(*value);
        else spec.params[key] = *value;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Ground-truth file: one JSON record per line,
//   {"record":"event","type":T,"tracks":[...],"frames":[first,last],"detail":{...}}
//   {"record":"frame","frame_no":N,"timestamp_ms":T,"objects":[{"track_id":..,"class":..,"bbox":[..]}]}

inline std::string encode_truth(const GroundTruth& gt) {
    std::string out;
    for (const auto& e : gt.events) {
        nlohmann::ordered_json j;
        j["record"] = "event";
        j["type"] = e.type;
        j["tracks"] = e.tracks;
        j["frames"] = {e.first_frame, e.last_frame};
        auto detail = nlohmann::ordered_json::object();
        for (const auto& [k, v] : e.detail) detail[k] = v;
        j["detail"] = std::move(detail);
        out += j.dump() + "\n";
    }
    for (const auto& f : gt.frames) {
        nlohmann::ordered_json j;
        j["record"] = "frame";
        j["frame_no"] = f.frame_no;
        j["timestamp_ms"] = f.timestamp_ms;
        auto objs = nlohmann::ordered_json::array();
        for (const auto& o : f.objects) {
            nlohmann::ordered_json oj;
            oj["track_id"] = o.track_id;
            oj["class"] = o.class_name;
            oj["bbox"] = {o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h};
            objs.push_back(std::move(oj));
        }
        j["objects"] = std::move(objs);
        out += j.dump() + "\n";
    }
    return out;
}

inline GroundTruth decode_truth(std::string_view source) {
    GroundTruth gt;
    const auto lines = text::split_lines(source);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(lines[i]);
            const auto kind = j.at("record").get<std::string>();
            if (kind == "event") {
                GroundTruthEvent e;
                e.type = j.at("type").get<std::string>();
                e.tracks = j.at("tracks").get<std::vector<graph::TrackId>>();
                e.first_frame = j.at("frames").at(0).get<std::int64_t>();
                e.last_frame = j.at("frames").at(1).get<std::int64_t>();
                if (j.contains("detail"))
                    for (const auto& [k, v] : j["detail"].items()) e.detail[k] = v.get<std::string>();
                gt.events.push_back(std::move(e));
            } else if (kind == "frame") {
                GroundTruthFrame f;
                f.frame_no = j.at("frame_no").get<std::int64_t>();
                f.timestamp_ms = j.at("timestamp_ms").get<graph::TimestampMs>();
                for (const auto& o : j.at("objects")) {
                    const auto& b = o.at("bbox");
                    f.objects.push_back({o.at("track_id").get<graph::TrackId>(), o.at("class").get<std::string>(),
                                         {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                          b.at(3).get<double>()}});
                }
                gt.frames.push_back(std::move(f));
            } else {
                throw ParseError(ErrorCode::ParseError, i + 1, 0, "unknown record kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ErrorCode::ParseError, i + 1, 0, e.what());
        }
    }
    return gt;
}

}  // namespace mmcep::scenario
