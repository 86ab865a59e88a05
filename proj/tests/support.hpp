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

// Small helpers shared by the unit tests.
#pragma once

#include <functional>
#include <vector>

#include "mmcep/frames.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/ontology.hpp"

namespace testing_support {

inline mmcep::ErrorCode error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const mmcep::Error& e) {
        return e.code();
    }
    return static_cast<mmcep::ErrorCode>(-1);
}

inline mmcep::graph::Detection det(std::string cls, mmcep::spatial::Rect box,
                                   std::optional<mmcep::graph::TrackId> track = std::nullopt,
                                   mmcep::graph::Attributes attrs = {}) {
    return {std::move(cls), box, std::move(attrs), 1.0, track};
}

/// Box of width and height 1 centred on (cx, cy).
inline mmcep::spatial::Rect at(double cx, double cy) { return {cx - 0.5, cy - 0.5, 1, 1}; }

/// Appends records to a fresh stream and returns the frames in order.
inline std::vector<mmcep::graph::FramePtr> to_frames(const std::vector<mmcep::frames::FrameRecord>& records,
                                                     const mmcep::ontology::OntologySchema& schema) {
    mmcep::graph::GraphStream stream("test");
    std::vector<mmcep::graph::FramePtr> out;
    for (const auto& r : records)
        out.push_back(stream.append(mmcep::graph::build_mekg(r.detections, schema, r.timestamp_ms, r.frame_no)));
    return out;
}

/// One frame per entry of `per_frame`, timestamps 0, 33, 66, ...
inline std::vector<mmcep::graph::FramePtr> make_frames(const std::vector<std::vector<mmcep::graph::Detection>>& per_frame,
                                                       const mmcep::ontology::OntologySchema& schema) {
    std::vector<mmcep::frames::FrameRecord> records;
    for (std::size_t i = 0; i < per_frame.size(); ++i)
        records.push_back({"test", static_cast<std::int64_t>(i), static_cast<std::int64_t>(i) * 33, per_frame[i]});
    return to_frames(records, schema);
}

}  // namespace testing_support
