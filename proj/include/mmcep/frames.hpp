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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmcep/error.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/text.hpp"

/// Frame wire format: one JSON object per line, keys in this exact order:
///
///   {"stream_id":S,"frame_no":N,"timestamp_ms":T,"detections":[D...]}
///   D = {"class":C,"bbox":[x,y,w,h],"attributes":{k:v...},"confidence":c[,"track_id":id]}
///
/// Attribute keys are sorted; bbox and confidence are always written as
/// floating point; track_id is omitted when unknown. See docs/frame_format.md.
namespace mmcep::frames {

struct FrameRecord {
    std::string stream_id;
    std::int64_t frame_no = 0;
    graph::TimestampMs timestamp_ms = 0;
    std::vector<graph::Detection> detections;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

inline std::string encode(const FrameRecord& r) {
    nlohmann::ordered_json j;
    j["stream_id"] = r.stream_id;
    j["frame_no"] = r.frame_no;
    j["timestamp_ms"] = r.timestamp_ms;
    auto dets = nlohmann::ordered_json::array();
    for (const auto& d : r.detections) {
        nlohmann::ordered_json dj;
        dj["class"] = d.class_name;
        dj["bbox"] = {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h};
        auto attrs = nlohmann::ordered_json::object();
        for (const auto& [k, v] : d.attributes) attrs[k] = v;
        dj["attributes"] = std::move(attrs);
        dj["confidence"] = d.confidence;
        if (d.track_id) dj["track_id"] = *d.track_id;
        dets.push_back(std::move(dj));
    }
    j["detections"] = std::move(dets);
    return j.dump();
}

namespace detail {

[[noreturn]] inline void bad(std::size_t line, const std::string& what) {
    throw ParseError(ErrorCode::ParseError, line, 0, what);
}

inline void only_keys(const nlohmann::json& j, std::initializer_list<std::string_view> keys, std::size_t line) {
    for (const auto& [k, _] : j.items()) {
        bool known = false;
        for (auto key : keys) known = known || key == k;
        if (!known) bad(line, "unknown field '" + k + "'");
    }
}

inline double real(const nlohmann::json& j, std::string_view what, std::size_t line) {
    if (!j.is_number()) bad(line, std::string(what) + " must be a number");
    return j.get<double>();
}

inline std::int64_t integer(const nlohmann::json& j, std::string_view what, std::size_t line) {
    if (!j.is_number_integer()) bad(line, std::string(what) + " must be an integer");
    return j.get<std::int64_t>();
}

}  // namespace detail

/// Parses and structurally validates one record. `line` is used for error
/// reporting only.
inline FrameRecord decode(std::string_view text, std::size_t line = 1) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        detail::bad(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) detail::bad(line, "record must be a JSON object");
    detail::only_keys(j, {"stream_id", "frame_no", "timestamp_ms", "detections"}, line);
    for (auto key : {"stream_id", "frame_no", "timestamp_ms", "detections"})
        if (!j.contains(key)) detail::bad(line, std::string("missing field '") + key + "'");
    FrameRecord r;
    if (!j["stream_id"].is_string()) detail::bad(line, "stream_id must be a string");
    r.stream_id = j["stream_id"].get<std::string>();
    r.frame_no = detail::integer(j["frame_no"], "frame_no", line);
    r.timestamp_ms = detail::integer(j["timestamp_ms"], "timestamp_ms", line);
    if (!j["detections"].is_array()) detail::bad(line, "detections must be an array");
    for (const auto& dj : j["detections"]) {
        if (!dj.is_object()) detail::bad(line, "detection must be an object");
        detail::only_keys(dj, {"class", "bbox", "attributes", "confidence", "track_id"}, line);
        graph::Detection d;
        if (!dj.contains("class") || !dj["class"].is_string()) detail::bad(line, "detection class must be a string");
        d.class_name = dj["class"].get<std::string>();
        if (!dj.contains("bbox") || !dj["bbox"].is_array() || dj["bbox"].size() != 4)
            detail::bad(line, "bbox must be [x, y, w, h]");
        const auto& b = dj["bbox"];
        d.bbox = {detail::real(b[0], "bbox x", line), detail::real(b[1], "bbox y", line),
                  detail::real(b[2], "bbox w", line), detail::real(b[3], "bbox h", line)};
        if (!d.bbox.valid()) detail::bad(line, "bbox has negative or non-finite extent");
        if (dj.contains("attributes")) {
            if (!dj["attributes"].is_object()) detail::bad(line, "attributes must be an object");
            for (const auto& [k, v] : dj["attributes"].items()) {
                if (!v.is_string()) detail::bad(line, "attribute '" + k + "' must be a string");
                d.attributes.emplace(k, v.get<std::string>());
            }
        }
        d.confidence = dj.contains("confidence") ? detail::real(dj["confidence"], "confidence", line) : 1.0;
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) detail::bad(line, "confidence outside [0, 1]");
        if (dj.contains("track_id")) d.track_id = detail::integer(dj["track_id"], "track_id", line);
        r.detections.push_back(std::move(d));
    }
    return r;
}

/// Parses a whole frame file. Blank lines are skipped; timestamps must be
/// strictly increasing.
inline std::vector<FrameRecord> parse_frames_text(std::string_view source) {
    std::vector<FrameRecord> out;
    const auto lines = text::split_lines(source);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        FrameRecord r = decode(lines[i], i + 1);
        if (!out.empty() && r.timestamp_ms <= out.back().timestamp_ms)
            throw ParseError(ErrorCode::OrderingViolation, i + 1, 0,
                             "timestamp " + std::to_string(r.timestamp_ms) + " does not follow " +
                                 std::to_string(out.back().timestamp_ms));
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<FrameRecord> parse_frames(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open frame file '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_frames_text(content);
}

inline void write_frames(std::ostream& os, const std::vector<FrameRecord>& records) {
    for (const auto& r : records) os << encode(r) << '\n';
}

}  // namespace mmcep::frames
