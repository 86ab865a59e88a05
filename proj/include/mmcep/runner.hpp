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

#include <atomic>
#include <chrono>
#include <latch>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mmcep/config.hpp"
#include "mmcep/engine.hpp"
#include "mmcep/metrics.hpp"
#include "mmcep/query.hpp"
#include "mmcep/scenario.hpp"
#include "mmcep/schema_io.hpp"

namespace mmcep::runner {

struct RunSummary {
    std::uint64_t frames_accepted = 0;
    std::uint64_t frames_rejected = 0;
    std::uint64_t states = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t notifications = 0;
    std::vector<std::string> rejections;  // "P1 frame 7: ..." per rejected frame
    std::vector<engine::LatencySample> latencies;
};

/// Replays every publisher of `cfg` in config order, one after another, so
/// the notification log is reproducible byte for byte apart from latency.
inline RunSummary run_config(const config::EngineConfig& cfg, std::ostream* notifications,
                             std::ostream* state_log = nullptr) {
    auto options = cfg.options;
    options.state_backend = state_log;
    engine::Engine eng(config::load_schema(cfg), options);
    std::vector<config::LoadedPublisher> loaded;
    for (const auto& src : cfg.publishers) loaded.push_back(config::load_publisher(cfg, src));
    for (const auto& p : loaded) eng.add_publisher(p.config);
    std::set<std::string> subscribers;
    for (const auto& q : cfg.queries) {
        eng.register_query(q);
        subscribers.insert(q.subscriber);
    }
    for (const auto& s : subscribers)
        eng.subscribe(s, [notifications](const engine::Notification& n) {
            if (notifications) *notifications << engine::encode(n) << '\n';
        });
    RunSummary out;
    for (const auto& p : loaded) {
        for (const auto& rec : p.frames) {
            const auto r = eng.ingest_frame(p.config.id, rec);
            if (!r) out.rejections.push_back(p.config.id + " frame " + std::to_string(rec.frame_no) + ": " + r.message);
        }
    }
    eng.finish();
    for (const auto& p : loaded) {
        const auto st = eng.stats(p.config.id);
        out.frames_accepted += st.frames_accepted;
        out.frames_rejected += st.rejected_out_of_order + st.rejected_invalid;
        out.states += st.states;
        out.evaluations += st.evaluations;
        out.notifications += st.notifications;
    }
    out.latencies = eng.latency_samples();
    return out;
}

/// Matcher latency series per query id over `repeat` replays of `cfg`.
inline std::map<std::string, std::vector<double>> measure_latency(const config::EngineConfig& cfg, int repeat) {
    std::map<std::string, std::vector<double>> series;
    for (const auto& q : cfg.queries) series[q.id];
    for (int r = 0; r < repeat; ++r)
        for (const auto& s : run_config(cfg, nullptr).latencies) series[s.query_id].push_back(s.latency_us);
    return series;
}

struct ThroughputSpec {
    schema_io::SchemaBundle schema = schema_io::traffic_schema();
    engine::EngineOptions options;
    /// Source replicated per stream; stream i uses seed + i.
    std::string descriptor = "synthetic:multi_object_noise objects=10 drop=0 frames=3000";
    /// Query replicated per stream with the publisher replaced.
    query::Query query = query::parse_query("QUERY q SUBSCRIBER s OBJECT Car WINDOW COUNT 5 FROM P");
};

struct ThroughputPoint {
    int streams = 0;
    std::uint64_t frames = 0;
    std::uint64_t notifications = 0;
    double seconds = 0;
    double frames_per_second = 0;
};

/// Drives `streams` publisher lanes from one thread each. Frames are
/// generated beforehand; only ingestion and matching are timed.
inline ThroughputPoint measure_throughput(const ThroughputSpec& spec, int streams) {
    if (streams < 1) fail(ErrorCode::ValidationError, "need at least one stream");
    auto options = spec.options;
    options.record_latency = false;
    options.state_backend = nullptr;
    engine::Engine eng(spec.schema, options);
    std::vector<std::vector<frames::FrameRecord>> inputs;
    std::vector<std::string> ids;
    for (int i = 0; i < streams; ++i) {
        const std::string id = "P" + std::to_string(i + 1);
        auto ss = scenario::parse_descriptor(spec.descriptor, id);
        ss.seed += static_cast<std::uint64_t>(i);
        auto sc = scenario::generate_scenario(ss);
        eng.add_publisher({id, sc.slots, sc.parking_threshold, {}});
        auto q = spec.query;
        q.id += "_" + id;
        q.publishers = {id};
        eng.register_query(q);
        inputs.push_back(std::move(sc.frames));
        ids.push_back(id);
    }
    std::atomic<std::uint64_t> delivered{0};
    eng.subscribe(spec.query.subscriber, [&](const engine::Notification&) { delivered.fetch_add(1, std::memory_order_relaxed); });

    std::latch ready(streams + 1);
    std::vector<std::thread> workers;
    for (int i = 0; i < streams; ++i)
        workers.emplace_back([&, i] {
            ready.arrive_and_wait();
            for (const auto& rec : inputs[static_cast<std::size_t>(i)]) eng.ingest_frame(ids[static_cast<std::size_t>(i)], rec);
        });
    ready.arrive_and_wait();
    const auto t0 = std::chrono::steady_clock::now();
    for (auto& w : workers) w.join();
    const auto t1 = std::chrono::steady_clock::now();

    ThroughputPoint p;
    p.streams = streams;
    for (const auto& id : ids) p.frames += eng.stats(id).frames_accepted;
    p.notifications = delivered.load();
    p.seconds = std::chrono::duration<double>(t1 - t0).count();
    p.frames_per_second = p.seconds > 0 ? static_cast<double>(p.frames) / p.seconds : 0.0;
    return p;
}

}  // namespace mmcep::runner
