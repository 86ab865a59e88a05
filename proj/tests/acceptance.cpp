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

// Runs the nine acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "mmcep.hpp"
#include "oracles/allen_oracle.hpp"
#include "oracles/de9im_raster.hpp"
#include "oracles/f1_oracle.hpp"

using namespace mmcep;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

spatial::Rect to_rect(const oracle::IntBox& b) {
    return {double(b.x0), double(b.y0), double(b.x1 - b.x0), double(b.y1 - b.y0)};
}

oracle::IntBox random_box(std::mt19937_64& rng, bool positive) {
    std::uniform_int_distribution<int> coord(0, 32);
    while (true) {
        int x0 = coord(rng), x1 = coord(rng), y0 = coord(rng), y1 = coord(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        if (!positive || (x0 < x1 && y0 < y1)) return {x0, y0, x1, y1};
    }
}

std::optional<bool> try_holds(spatial::TopologicalRelation r, const spatial::Rect& a, const spatial::Rect& b) {
    try {
        return spatial::holds_topology(r, a, b);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::UndefinedPredicate) throw;
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------

Outcome topology_oracle() {
    using TR = spatial::TopologicalRelation;
    Outcome out;
    std::mt19937_64 rng(1001);
    int degenerate = 0;
    for (int i = 0; i < 10000 && out.pass; ++i) {
        const auto a = random_box(rng, false);
        const auto b = random_box(rng, false);
        degenerate += a.dim() < 2 || b.dim() < 2;
        const auto ra = to_rect(a), rb = to_rect(b);
        const auto p = oracle::predicates(a, b);
        const std::string pair = " for pair " + std::to_string(i);
        out.require(spatial::de9im(ra, rb).to_string() == oracle::raster(a, b).str(), "DE-9IM matrix" + pair);
        out.require(spatial::holds_topology(TR::Disjoint, ra, rb) == p.disjoint, "Disjoint" + pair);
        out.require(spatial::holds_topology(TR::Intersect, ra, rb) == p.intersect, "Intersect" + pair);
        out.require(spatial::holds_topology(TR::Touch, ra, rb) == p.touch, "Touch" + pair);
        out.require(spatial::holds_topology(TR::Within, ra, rb) == p.within, "Within" + pair);
        out.require(spatial::holds_topology(TR::Contains, ra, rb) == p.contains, "Contains" + pair);
        out.require(spatial::holds_topology(TR::CoveredBy, ra, rb) == p.covered_by, "CoveredBy" + pair);
        out.require(spatial::holds_topology(TR::Inside, ra, rb) == p.inside, "Inside" + pair);
        out.require(try_holds(TR::Overlap, ra, rb) == p.overlap, "Overlap" + pair);
        out.require(try_holds(TR::Crosses, ra, rb) == p.crosses, "Crosses" + pair);
    }
    for (int i = 0; i < 10000 && out.pass; ++i) {
        const auto a = random_box(rng, true);
        const auto b = random_box(rng, true);
        const auto truth = oracle::rcc8_holds(a, b);
        const auto held = std::count(truth.begin(), truth.end(), true);
        out.require(held == 1, "RCC-8 oracle found " + std::to_string(held) + " classes");
        out.require(truth[static_cast<std::size_t>(spatial::rcc8(to_rect(a), to_rect(b)))], "RCC-8 class disagrees");
    }
    if (out.pass)
        out.detail = "10000 pairs (" + std::to_string(degenerate) + " with a point or segment) x 9 predicates; 10000 RCC-8 pairs";
    return out;
}

Outcome allen_exhaustive() {
    Outcome out;
    std::mt19937_64 rng(2002);
    std::uniform_int_distribution<std::int64_t> t(0, 40);
    std::array<int, 13> seen{};
    for (int i = 0; i < 10000 && out.pass; ++i) {
        std::int64_t a0 = t(rng), a1 = t(rng), b0 = t(rng), b1 = t(rng);
        if (a0 == a1 || b0 == b1) {
            --i;
            continue;
        }
        if (a0 > a1) std::swap(a0, a1);
        if (b0 > b1) std::swap(b0, b1);
        const temporal::Interval i1(a0, a1), i2(b0, b1);
        const auto holds = oracle::allen_holds({a0, a1}, {b0, b1});
        const auto count = std::count(holds.begin(), holds.end(), true);
        out.require(count == 1, std::to_string(count) + " relations hold");
        const auto r = temporal::allen(i1, i2);
        const auto idx = static_cast<std::size_t>(std::find(holds.begin(), holds.end(), true) - holds.begin());
        out.require(idx < 13 && temporal::to_string(r) == oracle::kAllenNames[idx], "relation disagrees with oracle");
        out.require(temporal::allen(i2, i1) == temporal::inverse(r), "converse is not the inverse");
        if (idx < 13) ++seen[idx];
    }
    out.require(std::count(seen.begin(), seen.end(), 0) == 0, "not every relation was sampled");
    if (out.pass) out.detail = "10000 pairs, all 13 relations sampled";
    return out;
}

// Overtake notifications of one scenario run through the engine.
std::vector<rules::RuleMatch> engine_overtakes(const scenario::Scenario& sc) {
    engine::Engine eng(schema_io::traffic_schema());
    eng.add_publisher({"P1", {}, 0.5, {}});
    eng.register_query(query::parse_query("QUERY q SUBSCRIBER s PATTERN Overtake(Car,Bike) WINDOW COUNT 5 FROM P1"));
    std::vector<rules::RuleMatch> out;
    eng.subscribe("s", [&](const engine::Notification& n) {
        for (const auto& m : n.relations) out.push_back(m);
    });
    for (const auto& f : sc.frames) eng.ingest_frame("P1", f);
    eng.finish();
    return out;
}

Outcome overtake_fidelity() {
    Outcome out;
    using temporal::BinaryOp;
    out.require(!temporal::apply(BinaryOp::Xnor, true, false), "XNOR(1,0) is not 0");
    out.require(temporal::apply(BinaryOp::Xnor, true, true), "XNOR(1,1) is not 1");

    const auto schema = schema_io::traffic_schema().schema;
    auto pair_frames = [&](double x1a, double x2a, double x1b, double x2b) {
        graph::GraphStream st("P");
        std::vector<graph::FramePtr> fs;
        for (auto [xa, xb, ts] : {std::tuple{x1a, x2a, 0}, std::tuple{x1b, x2b, 33}}) {
            const std::vector<graph::Detection> ds{{"Car", {xa - 0.5, 4.5, 1, 1}, {}, 1.0, 1},
                                                   {"Car", {xb - 0.5, 4.5, 1, 1}, {}, 1.0, 2}};
            fs.push_back(st.append(graph::build_mekg(ds, schema, ts)));
        }
        return fs;
    };
    // Centroids (1,5),(5,5) then (6,5),(5,5): b = (1,0), an overtake.
    const auto passed = rules::eval_overtake(pair_frames(1, 5, 6, 5), {}, schema);
    out.require(passed.size() == 1 && passed[0].detail.at("b") == "1,0", "b=(1,0) case not reported");
    // (1,5),(5,5) then (2,5),(5,5): b = (1,1), no overtake.
    out.require(rules::eval_overtake(pair_frames(1, 5, 2, 5), {}, schema).empty(), "b=(1,1) case reported");

    std::mt19937_64 rng(3003);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    int tp = 0, fp = 0, fn = 0;
    const int frames = 60;
    for (int i = 0; i < 100; ++i) {
        const bool overtake = i < 50;
        scenario::ScenarioSpec spec;
        spec.kind = overtake ? scenario::Kind::Overtake : scenario::Kind::FollowNoOvertake;
        spec.seed = static_cast<std::uint64_t>(i);
        spec.frames = frames;
        spec.stream_id = "P1";
        const int gap = pick(10, 80), b_speed = pick(1, 3);
        int dv = overtake ? pick(1, 5) : -pick(0, 2);
        if (overtake) dv = std::max(dv, (gap + frames - 3) / (frames - 2));
        spec.params = {{"a_x0", 60}, {"b_x0", 60 + gap}, {"b_speed", b_speed}, {"a_speed", b_speed + dv},
                       {"lane_offset", pick(0, 40)}};
        const auto sc = scenario::generate_scenario(spec);
        // Centroid gap closes at dv per frame; the order flips once it reaches zero.
        const int crossing = overtake ? (gap + dv - 1) / dv : -1;
        const auto found = engine_overtakes(sc);
        bool matched = false;
        for (const auto& m : found) {
            const bool right = crossing >= 0 && m.detail.at("transition_frame") == std::to_string(crossing) &&
                               m.detail.at("overtaker") == "o1" && !matched;
            if (right) {
                ++tp;
                matched = true;
            } else {
                ++fp;
            }
        }
        if (crossing >= 0 && !matched) ++fn;
    }
    const double precision = tp + fp ? double(tp) / (tp + fp) : 1.0;
    const double recall = tp + fn ? double(tp) / (tp + fn) : 1.0;
    out.require(precision == 1.0 && recall == 1.0, "precision " + std::to_string(precision) + ", recall " + std::to_string(recall));
    if (out.pass) out.detail = "XNOR cases exact; 100 scenarios, tp=" + std::to_string(tp) + " fp=0 fn=0";
    return out;
}

Outcome parking_fidelity() {
    Outcome out;
    int scenarios = 0, events = 0;
    for (std::uint64_t seed = 0; seed < 40 && out.pass; ++seed) {
        scenario::ScenarioSpec spec;
        spec.kind = scenario::Kind::ParkingEnterExit;
        spec.seed = seed;
        spec.stream_id = "P1";
        spec.params["threshold"] = std::vector<double>{0.3, 0.5, 0.7, 0.9}[seed % 4];
        const auto sc = scenario::generate_scenario(spec);
        const double r = sc.parking_threshold;
        const auto slot = sc.slots.at(0).rect;

        engine::Engine eng(schema_io::traffic_schema());
        eng.add_publisher({"P1", sc.slots, r, {}});
        eng.register_query(query::parse_query("QUERY q SUBSCRIBER s PATTERN ParkingLotFull(Car,Slot) WINDOW COUNT 5 FROM P1"));
        std::vector<std::pair<std::string, std::int64_t>> got;
        eng.subscribe("s", [&](const engine::Notification& n) {
            for (const auto& m : n.relations) got.emplace_back(m.detail.at("event"), std::stoll(m.detail.at("transition_frame")));
        });
        for (const auto& f : sc.frames) eng.ingest_frame("P1", f);

        // Overlap ratio from the raw boxes, frame by frame.
        const std::int64_t covered = static_cast<std::int64_t>(sc.frames.size()) / 5 * 5;
        std::vector<std::pair<std::string, std::int64_t>> want;
        bool occupied = false;
        for (std::int64_t f = 0; f < covered; ++f) {
            double best = 0;
            for (const auto& d : sc.frames[static_cast<std::size_t>(f)].detections) {
                if (d.class_name != "Car") continue;
                const double ix = std::max(0.0, std::min(d.bbox.x + d.bbox.w, slot.x + slot.w) - std::max(d.bbox.x, slot.x));
                const double iy = std::max(0.0, std::min(d.bbox.y + d.bbox.h, slot.y + slot.h) - std::max(d.bbox.y, slot.y));
                best = std::max(best, ix * iy / (slot.w * slot.h));
            }
            const bool now = best > r;
            if (now != occupied) want.emplace_back(now ? "SlotFull" : "SlotVacant", f);
            occupied = now;
        }
        out.require(got == want, "event frames differ for seed " + std::to_string(seed));
        for (std::size_t i = 0; i < got.size(); ++i)
            out.require(got[i].first == (i % 2 ? "SlotVacant" : "SlotFull"), "events do not alternate");
        out.require(!want.empty(), "scenario without events");
        ++scenarios;
        events += static_cast<int>(got.size());
    }
    if (out.pass) out.detail = std::to_string(scenarios) + " scenarios, " + std::to_string(events) + " events";
    return out;
}

Outcome semantic_enrichment() {
    Outcome out;
    std::mt19937_64 rng(5005);
    std::vector<frames::FrameRecord> recs;
    std::map<std::int64_t, std::size_t> cars;
    for (int f = 0; f < 100; ++f) {
        frames::FrameRecord r{"P1", f, f * 33, {}};
        const int n = std::uniform_int_distribution<int>(0, 6)(rng);
        for (int k = 0; k < n; ++k) r.detections.push_back({"Car", {k * 70.0, 10, 60, 30}, {}, 1.0, std::nullopt});
        cars[r.timestamp_ms] = static_cast<std::size_t>(n);
        recs.push_back(std::move(r));
    }
    auto run = [&](graph::Enrichment mode) {
        engine::EngineOptions opts;
        opts.enrichment = mode;
        engine::Engine eng(schema_io::traffic_schema(), opts);
        eng.add_publisher({"P1", {}, 0.5, {}});
        eng.register_query(query::parse_query("QUERY q3 SUBSCRIBER s OBJECT Vehicle WINDOW COUNT 5 FROM P1"));
        std::map<std::int64_t, std::size_t> counts;
        for (const auto& [ts, _] : cars) counts[ts] = 0;
        std::size_t notifications = 0;
        eng.subscribe("s", [&](const engine::Notification& n) {
            ++notifications;
            for (const auto& f : n.objects)
                for (const auto& node : f.nodes) counts[f.timestamp] += node.class_name == "Car";
        });
        for (const auto& r : recs) eng.ingest_frame("P1", r);
        return std::pair{counts, notifications};
    };
    const auto [with, n_with] = run(graph::Enrichment::Hierarchy);
    out.require(with == cars, "per-frame Vehicle matches differ from Car counts");
    const auto [without, n_without] = run(graph::Enrichment::ExactClass);
    out.require(n_without == 0, "hierarchy disabled still matched");
    std::size_t total = 0;
    for (const auto& [_, c] : cars) total += c;
    if (out.pass) out.detail = std::to_string(total) + " cars over 100 frames; 0 matches without hierarchy";
    return out;
}

Outcome windowing_f1() {
    Outcome out;
    scenario::ScenarioSpec spec;
    spec.kind = scenario::Kind::MultiObjectNoise;
    spec.seed = 6006;
    spec.frames = 125;
    spec.stream_id = "P1";
    spec.params = {{"drop", 0.2}, {"objects", 10}};
    const auto sc = scenario::generate_scenario(spec);

    engine::Engine eng(schema_io::traffic_schema());
    eng.add_publisher({"P1", {}, 0.5, {}});
    eng.register_query(query::parse_query("QUERY q SUBSCRIBER s OBJECT Car WINDOW COUNT 5 FROM P1"));
    std::string log;
    eng.subscribe("s", [&](const engine::Notification& n) { log += engine::encode(n) + "\n"; });
    for (const auto& f : sc.frames) eng.ingest_frame("P1", f);
    eng.finish();
    const auto states = eng.stats("P1").states;
    out.require(states == 25, std::to_string(states) + " states");

    const auto report = metrics::compute_f1(metrics::read_predictions(log), sc.truth, 5, std::set<std::string>{"Car"});
    std::vector<double> frame_f1;
    for (std::size_t i = 0; i < sc.frames.size(); ++i) {
        std::vector<oracle::LabelledBox> pred, truth;
        for (const auto& d : sc.frames[i].detections)
            if (d.class_name == "Car") pred.push_back({d.class_name, d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h});
        for (const auto& o : sc.truth.frames[i].objects)
            if (o.class_name == "Car") truth.push_back({o.class_name, o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h});
        frame_f1.push_back(oracle::frame_f1(pred, truth));
    }
    const auto want = oracle::state_f1(frame_f1, 5);
    out.require(report.state_f1 == want, "state F1 differs from oracle");
    double mean = 0;
    for (double v : want) mean += v / static_cast<double>(want.size());
    if (out.pass) {
        std::ostringstream d;
        d << "25 states, mean state F1 " << mean;
        out.detail = d.str();
    }
    return out;
}

Outcome latency_method() {
    Outcome out;
    const auto cfg = config::load_engine_config("samples/latency.cfg");
    const auto series = runner::measure_latency(cfg, 5);
    const auto obj = metrics::summarize(series.at("obj"));
    const auto ovt = metrics::summarize(series.at("ovt"));
    out.require(obj.count > 0 && obj.count == ovt.count, "series sizes differ");
    out.require(obj.median < 5000.0, "object median " + std::to_string(obj.median) + " us");
    out.require(ovt.median < 10000.0, "overtake median " + std::to_string(ovt.median) + " us");
    out.require(ovt.median > obj.median, "overtake median not above object median");
    std::ostringstream d;
    d << obj.count << " states each; median object " << obj.median << " us, overtake " << ovt.median << " us";
    if (out.pass) out.detail = d.str();
    else out.detail += " (" + d.str() + ")";
    return out;
}

Outcome throughput_method() {
    Outcome out;
    runner::ThroughputSpec spec;
    std::ostringstream d;
    double at3 = 0;
    for (int k = 1; k <= 4; ++k) {
        const auto p = runner::measure_throughput(spec, k);
        out.require(p.frames == static_cast<std::uint64_t>(3000 * k), "frames lost at k=" + std::to_string(k));
        out.require(p.notifications > 0, "no notifications at k=" + std::to_string(k));
        d << (k > 1 ? ", " : "") << "k=" << k << ": " << static_cast<long long>(p.frames_per_second) << " fps";
        if (k == 3) at3 = p.frames_per_second;
    }
    out.require(at3 >= 10000.0, "k=3 aggregate below 10000 fps");
    if (out.pass) out.detail = d.str();
    else out.detail += " (" + d.str() + ")";
    return out;
}

Outcome determinism() {
    Outcome out;
    const auto dir = std::filesystem::temp_directory_path() / "mmcep_acceptance_replay";
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> sources{
        {"P1", "synthetic:multi_object_noise seed=91 frames=300 drop=0.2"},
        {"P2", "synthetic:overtake seed=92 frames=90"},
        {"P3", "synthetic:parking_enter_exit seed=93 dwell=20"},
    };
    std::ofstream cfg(dir / "replay.cfg");
    cfg << "[publishers]\n";
    for (const auto& [id, desc] : sources) {
        std::ofstream f(dir / (id + ".jsonl"));
        frames::write_frames(f, scenario::generate_scenario(scenario::parse_descriptor(desc, id)).frames);
        cfg << id << " = " << id << ".jsonl\n";
    }
    cfg << "[slots]\nP3 s1 = 300 100 60 120\n[queries]\n"
        << "QUERY a SUBSCRIBER s1 OBJECT Car WHERE color=black WINDOW COUNT 5 FROM P1, P2\n"
        << "QUERY b SUBSCRIBER s2 PATTERN Overtake(Vehicle,Vehicle) WINDOW COUNT 5 SLIDE 1 FROM P1, P2\n"
        << "QUERY c SUBSCRIBER s3 PATTERN ParkingLotFull(Car,Slot) WINDOW TIME 500 FROM P3\n"
        << "QUERY d SUBSCRIBER s1 OBJECT Vehicle OBJECT Person WINDOW TIME 1000 FROM P1\n";
    cfg.close();

    auto replay = [&] {
        std::ostringstream log;
        runner::run_config(config::load_engine_config((dir / "replay.cfg").string()), &log);
        std::string stripped;
        std::istringstream lines(log.str());
        for (std::string l; std::getline(lines, l);) stripped += metrics::strip_latency(l) + "\n";
        return std::pair{stripped, log.str()};
    };
    const auto [first, raw] = replay();
    const auto [second, _] = replay();
    out.require(!first.empty(), "empty log");
    out.require(first == second, "stripped logs differ");
    std::filesystem::remove_all(dir);
    if (out.pass)
        out.detail = std::to_string(std::count(first.begin(), first.end(), '\n')) + " notifications, " +
                     std::to_string(first.size()) + " bytes identical";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;  // 0 for no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "topological predicates vs raster oracle", 30, topology_oracle},
        {2, "Allen relations exhaustive and converse", 5, allen_exhaustive},
        {3, "overtake XNOR rule and scenario accuracy", 10, overtake_fidelity},
        {4, "parking slot events", 5, parking_fidelity},
        {5, "class hierarchy enrichment", 0, semantic_enrichment},
        {6, "count window states and per-state F1", 0, windowing_f1},
        {7, "per-state matcher latency", 60, latency_method},
        {8, "throughput curve over 1..4 streams", 0, throughput_method},
        {9, "deterministic replay", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs >= c.limit_s) {
            o.pass = false;
            o.detail += " (over the " + std::to_string(static_cast<int>(c.limit_s)) + " s limit)";
        }
        failed += !o.pass;
        std::printf("criterion %d: %s  %s  [%.2f s]  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
