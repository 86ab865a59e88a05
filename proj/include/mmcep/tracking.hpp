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
#include <map>
#include <tuple>
#include <vector>

#include "mmcep/frames.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/spatial.hpp"

namespace mmcep::tracking {

/// Greedy IoU track association, one frame at a time.
///
/// Detections of a class are matched against live tracks of the same class
/// in descending IoU order; a pair with IoU >= threshold continues the track,
/// anything left over starts a new one. A track stays live for `max_age`
/// missed frames (0 means it must appear in the immediately preceding
/// frame). Detections that already carry a track id are kept as they are.
class TrackAssociator {
public:
    explicit TrackAssociator(double iou_threshold = 0.3, int max_age = 0)
        : threshold_(iou_threshold), max_age_(std::max(0, max_age)) {}

    void associate(std::vector<graph::Detection>& detections) {
        const std::int64_t now = frame_++;
        // Drop tracks that are too old to be continued.
        for (auto it = tracks_.begin(); it != tracks_.end();) {
            if (now - it->second.last_frame - 1 > max_age_) it = tracks_.erase(it);
            else ++it;
        }
        std::map<graph::TrackId, bool> taken;
        for (const auto& d : detections) {
            if (d.track_id) {
                taken[*d.track_id] = true;
                next_id_ = std::max(next_id_, *d.track_id + 1);
            }
        }

        struct Candidate {
            double iou;
            graph::TrackId track;
            std::size_t detection;
        };
        std::vector<Candidate> candidates;
        for (std::size_t i = 0; i < detections.size(); ++i) {
            const auto& d = detections[i];
            if (d.track_id) continue;
            for (const auto& [id, t] : tracks_) {
                if (taken.contains(id) || t.class_name != d.class_name) continue;
                const double v = spatial::iou(t.box, d.bbox);
                if (v >= threshold_) candidates.push_back({v, id, i});
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return std::tie(b.iou, a.track, a.detection) < std::tie(a.iou, b.track, b.detection);
        });
        std::vector<bool> assigned(detections.size(), false);
        for (const auto& c : candidates) {
            if (assigned[c.detection] || taken.contains(c.track)) continue;
            detections[c.detection].track_id = c.track;
            assigned[c.detection] = true;
            taken[c.track] = true;
        }
        for (auto& d : detections) {
            if (!d.track_id) d.track_id = next_id_++;
            tracks_[*d.track_id] = Track{d.class_name, d.bbox, now};
        }
    }

    void reset() {
        tracks_.clear();
        frame_ = 0;
        next_id_ = 1;
    }

private:
    struct Track {
        std::string class_name;
        spatial::Rect box;
        std::int64_t last_frame = 0;
    };

    double threshold_;
    std::int64_t max_age_;
    std::map<graph::TrackId, Track> tracks_;
    std::int64_t frame_ = 0;
    graph::TrackId next_id_ = 1;
};

/// Fills missing track ids across an ordered frame sequence.
inline std::vector<frames::FrameRecord> track_associate(std::vector<frames::FrameRecord> records,
                                                        double iou_threshold = 0.3, int max_age = 0) {
    TrackAssociator assoc(iou_threshold, max_age);
    for (auto& r : records) assoc.associate(r.detections);
    return records;
}

}  // namespace mmcep::tracking
