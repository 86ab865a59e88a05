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
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mmcep/error.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/scenario.hpp"
#include "mmcep/spatial.hpp"
#include "mmcep/text.hpp"

namespace mmcep::metrics {

struct Counts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    friend bool operator==(const Counts&, const Counts&) = default;
};

/// F1 = 2TP / (2TP + FP + FN); a frame with nothing expected and nothing
/// predicted scores 1.
inline double f1(const Counts& c) noexcept {
    const auto denom = 2 * c.tp + c.fp + c.fn;
    return denom == 0 ? 1.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

struct Box {
    std::string class_name;
    spatial::Rect bbox;
};

/// Greedy one-to-one matching by descending IoU; a pair counts when the
/// classes agree and IoU >= `min_iou`.
inline Counts match_frame(const std::vector<Box>& predicted, const std::vector<Box>& truth, double min_iou = 0.5) {
    struct Pair {
        double iou;
        std::size_t p;
        std::size_t t;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (predicted[i].class_name != truth[j].class_name) continue;
            const double v = spatial::iou(predicted[i].bbox, truth[j].bbox);
            if (v >= min_iou) pairs.push_back({v, i, j});
        }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return std::tie(b.iou, a.p, a.t) < std::tie(a.iou, b.p, b.t); });
    std::vector<bool> used_p(predicted.size()), used_t(truth.size());
    Counts c;
    for (const auto& pr : pairs) {
        if (used_p[pr.p] || used_t[pr.t]) continue;
        used_p[pr.p] = used_t[pr.t] = true;
        ++c.tp;
    }
    c.fp = static_cast<std::int64_t>(predicted.size()) - c.tp;
    c.fn = static_cast<std::int64_t>(truth.size()) - c.tp;
    return c;
}

/// Object predictions per frame timestamp, read from a notification log.
using Predictions = std::map<graph::TimestampMs, std::vector<Box>>;

/// Collects the object bindings of every notification line, optionally for
/// one query only. Relation and error notifications are skipped.
inline Predictions read_predictions(std::string_view log, std::optional<std::string> query_id = {}) {
    Predictions out;
    const auto lines = text::split_lines(log);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto body = text::trim(lines[i]);
        if (body.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
            if (query_id && j.at("query_id").get<std::string>() != *query_id) continue;
            const auto& b = j.at("bindings");
            if (!b.contains("objects")) continue;
            for (const auto& f : b["objects"]) {
                auto& boxes = out[f.at("timestamp_ms").get<graph::TimestampMs>()];
                for (const auto& n : f.at("nodes")) {
                    const auto& bb = n.at("bbox");
                    boxes.push_back({n.at("class").get<std::string>(),
                                     {bb.at(0).get<double>(), bb.at(1).get<double>(), bb.at(2).get<double>(),
                                      bb.at(3).get<double>()}});
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ErrorCode::ParseError, i + 1, 0, std::string("bad notification record: ") + e.what());
        }
    }
    return out;
}

struct F1Report {
    std::vector<Counts> frame_counts;
    std::vector<double> frame_f1;
    std::vector<double> state_f1;  // mean of each complete group of n frames
};

/// Per-frame and per-state F1 of `predicted` against the ground-truth
/// presence table. `classes` restricts which ground-truth objects count.
/// Frames past the last complete state are scored but not grouped.
inline F1Report compute_f1(const Predictions& predicted, const scenario::GroundTruth& truth, int window_n,
                           const std::optional<std::set<std::string>>& classes = std::nullopt) {
    if (window_n < 1) fail(ErrorCode::ValidationError, "window size must be >= 1");
    std::set<graph::TimestampMs> known;
    for (const auto& f : truth.frames) known.insert(f.timestamp_ms);
    for (const auto& [ts, _] : predicted)
        if (!known.contains(ts))
            fail(ErrorCode::RangeMismatch, "prediction at " + std::to_string(ts) + " ms has no ground-truth frame");
    F1Report r;
    for (const auto& f : truth.frames) {
        std::vector<Box> expected;
        for (const auto& o : f.objects)
            if (!classes || classes->contains(o.class_name)) expected.push_back({o.class_name, o.bbox});
        const auto it = predicted.find(f.timestamp_ms);
        const Counts c = match_frame(it == predicted.end() ? std::vector<Box>{} : it->second, expected);
        r.frame_counts.push_back(c);
        r.frame_f1.push_back(f1(c));
    }
    const std::size_t n = static_cast<std::size_t>(window_n);
    for (std::size_t s = 0; s + n <= r.frame_f1.size(); s += n) {
        double sum = 0;
        for (std::size_t k = s; k < s + n; ++k) sum += r.frame_f1[k];
        r.state_f1.push_back(sum / static_cast<double>(n));
    }
    return r;
}

struct Summary {
    std::size_t count = 0;
    double mean = 0;
    double median = 0;
    double p99 = 0;
    double min = 0;
    double max = 0;
};

/// Mean, median, nearest-rank p99, min and max of a series.
inline Summary summarize(std::vector<double> series) {
    Summary s;
    s.count = series.size();
    if (series.empty()) return s;
    std::sort(series.begin(), series.end());
    s.mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    const std::size_t n = series.size();
    s.median = n % 2 ? series[n / 2] : (series[n / 2 - 1] + series[n / 2]) / 2.0;
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
    s.p99 = series[std::max<std::size_t>(rank, 1) - 1];
    s.min = series.front();
    s.max = series.back();
    return s;
}

/// Notification line with the wall-clock latency field removed, for
/// byte-level replay comparison.
inline std::string strip_latency(std::string_view line) {
    auto j = nlohmann::ordered_json::parse(line);
    j.erase("latency_us");
    return j.dump();
}

}  // namespace mmcep::metrics
